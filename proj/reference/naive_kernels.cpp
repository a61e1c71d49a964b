#include "naive_kernels.hpp"

#include <cmath>

namespace semjpeg::reference {

void naive_forward_dct(const double* samples64, double* coeffs64) {
    for (int v = 0; v < 8; ++v) {
        for (int u = 0; u < 8; ++u) {
            const double cu = u == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
            const double cv = v == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
            double acc = 0.0;
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    acc += (samples64[y * 8 + x] - 128.0) *
                           std::cos((2 * x + 1) * u * M_PI / 16.0) *
                           std::cos((2 * y + 1) * v * M_PI / 16.0);
                }
            }
            coeffs64[v * 8 + u] = 0.25 * cu * cv * acc;
        }
    }
}

void naive_inverse_dct(const double* coeffs64, double* samples64) {
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int v = 0; v < 8; ++v) {
                for (int u = 0; u < 8; ++u) {
                    const double cu = u == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
                    const double cv = v == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
                    acc += cu * cv * coeffs64[v * 8 + u] *
                           std::cos((2 * x + 1) * u * M_PI / 16.0) *
                           std::cos((2 * y + 1) * v * M_PI / 16.0);
                }
            }
            samples64[y * 8 + x] = 0.25 * acc + 128.0;
        }
    }
}

void naive_conv3x3(const double* in, int h, int w, int in_ch,
                   const double* weights, const double* bias, int out_ch,
                   double* out) {
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int o = 0; o < out_ch; ++o) {
                double acc = bias[o];
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        const int sy = y + ky - 1;
                        const int sx = x + kx - 1;
                        if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                        for (int i = 0; i < in_ch; ++i) {
                            acc += in[(static_cast<size_t>(sy) * w + sx) * in_ch + i] *
                                   weights[((static_cast<size_t>(o) * 3 + ky) * 3 + kx) * in_ch + i];
                        }
                    }
                }
                out[(static_cast<size_t>(y) * w + x) * out_ch + o] = acc;
            }
        }
    }
}

void naive_avgpool2(const double* in, int h, int w, int ch, double* out) {
    const int oh = h / 2;
    const int ow = w / 2;
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            for (int k = 0; k < ch; ++k) {
                const double a = in[(static_cast<size_t>(2 * y) * w + 2 * x) * ch + k];
                const double b = in[(static_cast<size_t>(2 * y) * w + 2 * x + 1) * ch + k];
                const double c = in[(static_cast<size_t>(2 * y + 1) * w + 2 * x) * ch + k];
                const double d = in[(static_cast<size_t>(2 * y + 1) * w + 2 * x + 1) * ch + k];
                out[(static_cast<size_t>(y) * ow + x) * ch + k] = (a + b + c + d) * 0.25;
            }
        }
    }
}

} // namespace semjpeg::reference
