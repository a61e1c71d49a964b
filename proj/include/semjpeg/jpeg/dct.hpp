#pragma once

#include <array>

namespace semjpeg::jpeg {

// 8x8 block of DCT coefficients (or spatial samples), row-major.
struct DctBlock {
    std::array<double, 64> coefficients{};
};

// Forward 2-D type-II DCT with JPEG normalization. Input samples are pixel
// values in [0,255]; the -128 level shift is applied internally. Separable
// row/column passes over a precomputed 8-point basis.
DctBlock forward_dct(const std::array<double, 64>& samples);

// Inverse transform back to [0,255]-range samples (level shift re-applied,
// no rounding or clamping here).
std::array<double, 64> inverse_dct(const DctBlock& block);

// In-place variants on raw 64-element buffers; these are the kernels the
// codec's per-block loops call.
void forward_dct_inplace(double* block64);
void inverse_dct_inplace(double* block64);

} // namespace semjpeg::jpeg
