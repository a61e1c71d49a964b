#include "semjpeg/eval/metrics.hpp"

#include <cmath>

#include "semjpeg/util/errors.hpp"

namespace semjpeg::eval {

namespace {

void check_shapes(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw ParameterError("metrics: image shapes differ");
    if (a.data.empty()) throw ParameterError("metrics: empty image");
}

} // namespace

double mse(const ImageTensor& a, const ImageTensor& b) {
    check_shapes(a, b);
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double rmse(const ImageTensor& a, const ImageTensor& b) { return std::sqrt(mse(a, b)); }

double psnr(const ImageTensor& a, const ImageTensor& b) {
    const double m = mse(a, b);
    if (m < 1e-10) return 100.0;
    return 10.0 * std::log10(1.0 / m);
}

std::vector<double> luma(const ImageTensor& img) {
    std::vector<double> out(static_cast<size_t>(img.h) * img.w);
    if (img.c == 1) {
        out = img.data;
    } else {
        for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x)
                out[static_cast<size_t>(y) * img.w + x] = 0.299 * img.at(y, x, 0) +
                                                          0.587 * img.at(y, x, 1) +
                                                          0.114 * img.at(y, x, 2);
    }
    return out;
}

double ssim(const ImageTensor& a, const ImageTensor& b) {
    check_shapes(a, b);
    if (a.h < 8 || a.w < 8) throw ParameterError("ssim: image smaller than the 8x8 window");

    const std::vector<double> la = luma(a);
    const std::vector<double> lb = luma(b);

    constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
    constexpr double kC2 = 0.03 * 0.03;

    double acc = 0.0;
    int windows = 0;
    for (int by = 0; by + 8 <= a.h; by += 8) {
        for (int bx = 0; bx + 8 <= a.w; bx += 8) {
            double sum_a = 0.0, sum_b = 0.0, sum_aa = 0.0, sum_bb = 0.0, sum_ab = 0.0;
            for (int y = by; y < by + 8; ++y) {
                for (int x = bx; x < bx + 8; ++x) {
                    const double va = la[static_cast<size_t>(y) * a.w + x];
                    const double vb = lb[static_cast<size_t>(y) * a.w + x];
                    sum_a += va;
                    sum_b += vb;
                    sum_aa += va * va;
                    sum_bb += vb * vb;
                    sum_ab += va * vb;
                }
            }
            const double n = 64.0;
            const double mu_a = sum_a / n;
            const double mu_b = sum_b / n;
            const double var_a = sum_aa / n - mu_a * mu_a;
            const double var_b = sum_bb / n - mu_b * mu_b;
            const double cov = sum_ab / n - mu_a * mu_b;
            const double s = ((2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2)) /
                             ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
            acc += s;
            ++windows;
        }
    }
    return acc / windows;
}

} // namespace semjpeg::eval
