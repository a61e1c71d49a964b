#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace semjpeg {

// H x W x C image, channels-last, values nominally in [0,1].
// C is 1 (gray) or 3 (RGB). Attacks and metrics operate on this type;
// 8-bit conversion happens only at codec and file boundaries.
struct ImageTensor {
    int h = 0;
    int w = 0;
    int c = 0;
    std::vector<double> data;

    ImageTensor() = default;
    ImageTensor(int h_, int w_, int c_, double fill = 0.0)
        : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_) * w_ * c_, fill) {}

    double& at(int y, int x, int ch) { return data[(static_cast<size_t>(y) * w + x) * c + ch]; }
    double at(int y, int x, int ch) const { return data[(static_cast<size_t>(y) * w + x) * c + ch]; }

    size_t size() const { return data.size(); }
    bool same_shape(const ImageTensor& o) const { return h == o.h && w == o.w && c == o.c; }
};

// Round-half-up to 8 bits, clamping to [0,255].
std::uint8_t to_byte(double v);
inline double from_byte(std::uint8_t b) { return b / 255.0; }

// Clamp every sample to [0,1].
void clamp01(ImageTensor& img);

// Binary PPM (P6, C=3) and PGM (P5, C=1), maxval 255.
ImageTensor read_pnm(const std::string& path);
void write_pnm(const ImageTensor& img, const std::string& path);

std::vector<std::uint8_t> to_bytes(const ImageTensor& img);
ImageTensor from_bytes(const std::vector<std::uint8_t>& bytes, int h, int w, int c);

} // namespace semjpeg
