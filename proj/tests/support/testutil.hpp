#pragma once

#include <array>
#include <cmath>

#include "semjpeg/image.hpp"
#include "semjpeg/util/rng.hpp"

namespace testsupport {

inline semjpeg::ImageTensor random_image(int h, int w, int c, semjpeg::Rng& rng) {
    semjpeg::ImageTensor img(h, w, c);
    for (double& v : img.data) v = rng.uniform01();
    return img;
}

// Smooth "natural-ish" test image: overlapping soft blobs on a gradient.
inline semjpeg::ImageTensor blobs_image(int h, int w, int c, semjpeg::Rng& rng) {
    semjpeg::ImageTensor img(h, w, c);
    const int nblobs = 4;
    std::array<double, 16> cx{}, cy{}, r{}, amp{};
    for (int b = 0; b < nblobs; ++b) {
        cx[b] = rng.uniform(0.0, w);
        cy[b] = rng.uniform(0.0, h);
        r[b] = rng.uniform(w / 8.0, w / 2.0);
        amp[b] = rng.uniform(0.2, 0.7);
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                double v = 0.25 + 0.4 * (static_cast<double>(x + y) / (h + w));
                for (int b = 0; b < nblobs; ++b) {
                    const double d2 = (x - cx[b]) * (x - cx[b]) + (y - cy[b]) * (y - cy[b]);
                    v += amp[b] * ((ch + 1) / 3.0) * std::exp(-d2 / (r[b] * r[b]));
                }
                img.at(y, x, ch) = std::min(1.0, std::max(0.0, v));
            }
    return img;
}

inline int max_abs_byte_diff(const std::vector<std::uint8_t>& a,
                             const std::vector<std::uint8_t>& b) {
    int worst = a.size() == b.size() ? 0 : 255;
    for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        const int d = std::abs(static_cast<int>(a[i]) - static_cast<int>(b[i]));
        worst = d > worst ? d : worst;
    }
    return worst;
}

} // namespace testsupport
