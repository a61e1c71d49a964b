#pragma once

#include "semjpeg/image.hpp"

namespace semjpeg::eval {

// All metrics work in [0,1] pixel units on equal-shaped images.
double mse(const ImageTensor& a, const ImageTensor& b);
double rmse(const ImageTensor& a, const ImageTensor& b);

// 10*log10(1/MSE) dB, capped at 100 dB once MSE drops below 1e-10.
double psnr(const ImageTensor& a, const ImageTensor& b);

// Mean local SSIM over non-overlapping 8x8 luma windows (box window aligned
// with the JPEG block grid), standard stabilization constants for dynamic
// range 1.0. Images must be at least 8x8.
double ssim(const ImageTensor& a, const ImageTensor& b);

// Rec.601 luma in [0,1]; identity for single-channel images.
std::vector<double> luma(const ImageTensor& img);

} // namespace semjpeg::eval
