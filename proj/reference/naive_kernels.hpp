#pragma once

// Serial reference implementations, deliberately written as direct
// summations with no factorization or parallelism. Tests and the benchmark
// compare the optimized kernels against these; production code never links
// this library.

#include <vector>

namespace semjpeg::reference {

// O(64^2) direct-summation 2-D DCT-II with JPEG normalization.
// Input samples in [0,255]; level shift applied internally.
void naive_forward_dct(const double* samples64, double* coeffs64);

// Direct-summation inverse; output in [0,255] range (unclamped).
void naive_inverse_dct(const double* coeffs64, double* samples64);

// Direct 3x3 convolution, zero padding, stride 1, channels-last layout.
// in: h*w*in_ch, weights: out_ch*3*3*in_ch, bias: out_ch, out: h*w*out_ch.
void naive_conv3x3(const double* in, int h, int w, int in_ch,
                   const double* weights, const double* bias, int out_ch,
                   double* out);

// 2x2 average pooling, stride 2 (h and w must be even).
void naive_avgpool2(const double* in, int h, int w, int ch, double* out);

} // namespace semjpeg::reference
