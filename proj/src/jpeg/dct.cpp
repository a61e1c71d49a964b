#include "semjpeg/jpeg/dct.hpp"

#include <cmath>

namespace semjpeg::jpeg {

namespace {

// basis[u][x] = C(u) * cos((2x+1) u pi / 16) / 2, so that a plain
// matrix product per axis yields the JPEG-normalized DCT.
struct Basis {
    double fwd[8][8];  // fwd[u][x]
    double inv[8][8];  // inv[x][u], transpose of fwd
    Basis() {
        for (int u = 0; u < 8; ++u) {
            double cu = (u == 0) ? 1.0 / std::sqrt(2.0) : 1.0;
            for (int x = 0; x < 8; ++x) {
                double v = 0.5 * cu * std::cos((2 * x + 1) * u * M_PI / 16.0);
                fwd[u][x] = v;
                inv[x][u] = v;
            }
        }
    }
};

const Basis& basis() {
    static const Basis b;
    return b;
}

// out = M * in per row axis: one separable pass.
inline void transform_rows(const double m[8][8], const double* in, double* out) {
    for (int r = 0; r < 8; ++r) {
        const double* src = in + r * 8;
        for (int u = 0; u < 8; ++u) {
            const double* w = m[u];
            double acc = w[0] * src[0] + w[1] * src[1] + w[2] * src[2] + w[3] * src[3] +
                         w[4] * src[4] + w[5] * src[5] + w[6] * src[6] + w[7] * src[7];
            out[r * 8 + u] = acc;
        }
    }
}

inline void transform_cols(const double m[8][8], const double* in, double* out) {
    for (int c = 0; c < 8; ++c) {
        double col[8];
        for (int y = 0; y < 8; ++y) col[y] = in[y * 8 + c];
        for (int v = 0; v < 8; ++v) {
            const double* w = m[v];
            double acc = w[0] * col[0] + w[1] * col[1] + w[2] * col[2] + w[3] * col[3] +
                         w[4] * col[4] + w[5] * col[5] + w[6] * col[6] + w[7] * col[7];
            out[v * 8 + c] = acc;
        }
    }
}

} // namespace

void forward_dct_inplace(double* block64) {
    double shifted[64];
    for (int i = 0; i < 64; ++i) shifted[i] = block64[i] - 128.0;
    double tmp[64];
    const Basis& b = basis();
    transform_rows(b.fwd, shifted, tmp);
    transform_cols(b.fwd, tmp, block64);
}

void inverse_dct_inplace(double* block64) {
    double tmp[64];
    const Basis& b = basis();
    transform_rows(b.inv, block64, tmp);
    transform_cols(b.inv, tmp, block64);
    for (int i = 0; i < 64; ++i) block64[i] += 128.0;
}

DctBlock forward_dct(const std::array<double, 64>& samples) {
    DctBlock out;
    out.coefficients = samples;
    forward_dct_inplace(out.coefficients.data());
    return out;
}

std::array<double, 64> inverse_dct(const DctBlock& block) {
    std::array<double, 64> out = block.coefficients;
    inverse_dct_inplace(out.data());
    return out;
}

} // namespace semjpeg::jpeg
