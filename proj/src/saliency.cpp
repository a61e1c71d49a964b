#include "semjpeg/saliency.hpp"

#include <algorithm>
#include <cmath>

#include "semjpeg/util/errors.hpp"

namespace semjpeg::saliency {

namespace {

// Per-class rectified responses summed over the admitted classes, at the
// class-map resolution. This is the shared core of both map variants.
struct RawMap {
    int h = 0, w = 0;
    std::vector<double> values;
    std::vector<int> classes;
};

RawMap raw_map_from_stack(const nn::ClassifierModel& model, const nn::ActivationStack& stack,
                          double threshold) {
    const ImageTensor& maps = stack.class_maps;
    RawMap raw;
    raw.h = maps.h;
    raw.w = maps.w;
    raw.values.assign(static_cast<size_t>(maps.h) * maps.w, 0.0);

    for (int c = 0; c < model.classes; ++c) {
        double total = 0.0;
        for (int y = 0; y < maps.h; ++y)
            for (int x = 0; x < maps.w; ++x) {
                const double v = maps.at(y, x, c);
                if (v > 0.0) total += v;
            }
        if (total > threshold) {
            raw.classes.push_back(c);
            for (int y = 0; y < maps.h; ++y)
                for (int x = 0; x < maps.w; ++x) {
                    const double v = maps.at(y, x, c);
                    if (v > 0.0) raw.values[static_cast<size_t>(y) * maps.w + x] += v;
                }
        }
    }
    return raw;
}

SaliencyMap finalize(const RawMap& raw, int out_h, int out_w) {
    SaliencyMap map;
    map.h = out_h;
    map.w = out_w;
    map.values.assign(static_cast<size_t>(out_h) * out_w, 0.0);
    map.contributing_classes = raw.classes;

    // bilinear upsample from activation resolution
    const double scale_y = static_cast<double>(out_h) / raw.h;
    const double scale_x = static_cast<double>(out_w) / raw.w;
    for (int y = 0; y < out_h; ++y) {
        double sy = (y + 0.5) / scale_y - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(raw.h - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, raw.h - 1);
        const double fy = sy - y0;
        for (int x = 0; x < out_w; ++x) {
            double sx = (x + 0.5) / scale_x - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(raw.w - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, raw.w - 1);
            const double fx = sx - x0;
            const double v00 = raw.values[static_cast<size_t>(y0) * raw.w + x0];
            const double v01 = raw.values[static_cast<size_t>(y0) * raw.w + x1];
            const double v10 = raw.values[static_cast<size_t>(y1) * raw.w + x0];
            const double v11 = raw.values[static_cast<size_t>(y1) * raw.w + x1];
            map.values[static_cast<size_t>(y) * out_w + x] =
                (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
        }
    }

    double peak = 0.0;
    for (double v : map.values) peak = std::max(peak, v);
    if (peak > 0.0)
        for (double& v : map.values) v /= peak;
    return map;
}

} // namespace

SaliencyMap msroi_map(const nn::ClassifierModel& model, const ImageTensor& x, double threshold) {
    const nn::ActivationStack stack = nn::forward(model, x);
    return finalize(raw_map_from_stack(model, stack, threshold), x.h, x.w);
}

SaliencyMap aug_msroi_map(const nn::ClassifierModel& model, const ImageTensor& x,
                          const AugConfig& config) {
    if (config.passes < 1) throw ParameterError("aug_msroi_map: need at least one pass");

    const bool jittered = config.input_amp > 0.0 || config.act_amp > 0.0;
    if (config.passes == 1 && !jittered) return msroi_map(model, x, config.threshold);

    // Seeds are drawn up front so the passes can run in any order (or in
    // parallel); accumulation below is in fixed pass order.
    Rng master(config.seed);
    std::vector<std::uint64_t> seeds(static_cast<size_t>(config.passes));
    for (auto& s : seeds) s = master.fork_seed();

    std::vector<RawMap> raws(static_cast<size_t>(config.passes));
#pragma omp parallel for schedule(static)
    for (int k = 0; k < config.passes; ++k) {
        Rng rng(seeds[static_cast<size_t>(k)]);
        const nn::ActivationStack stack =
            nn::forward_jittered(model, x, config.input_amp, config.act_amp, rng);
        raws[static_cast<size_t>(k)] = raw_map_from_stack(model, stack, config.threshold);
    }

    RawMap mean = raws[0];
    std::vector<int> all_classes = raws[0].classes;
    for (int k = 1; k < config.passes; ++k) {
        const RawMap& r = raws[static_cast<size_t>(k)];
        for (size_t i = 0; i < mean.values.size(); ++i) mean.values[i] += r.values[i];
        for (int c : r.classes) all_classes.push_back(c);
    }
    for (double& v : mean.values) v /= static_cast<double>(config.passes);

    std::sort(all_classes.begin(), all_classes.end());
    all_classes.erase(std::unique(all_classes.begin(), all_classes.end()), all_classes.end());
    mean.classes = std::move(all_classes);

    return finalize(mean, x.h, x.w);
}

jpeg::BlockQualityGrid map_to_block_qualities(const SaliencyMap& map, int q_min, int q_max) {
    if (q_min < 1 || q_max > 100 || q_min > q_max)
        throw ParameterError("map_to_block_qualities: need 1 <= q_min <= q_max <= 100");
    const int rows = jpeg::BlockQualityGrid::rows_for(map.h);
    const int cols = jpeg::BlockQualityGrid::cols_for(map.w);
    jpeg::BlockQualityGrid grid(rows, cols, q_min);
    for (int by = 0; by < rows; ++by) {
        for (int bx = 0; bx < cols; ++bx) {
            double acc = 0.0;
            int count = 0;
            for (int y = by * 8; y < std::min(by * 8 + 8, map.h); ++y)
                for (int x = bx * 8; x < std::min(bx * 8 + 8, map.w); ++x) {
                    acc += map.at(y, x);
                    ++count;
                }
            const double mean = count > 0 ? acc / count : 0.0;
            grid.at(by, bx) = static_cast<int>(std::floor(q_min + (q_max - q_min) * mean + 0.5));
        }
    }
    return grid;
}

double calibrate_threshold(const nn::ClassifierModel& model,
                           const std::vector<ImageTensor>& validation_images,
                           double keep_fraction) {
    if (validation_images.empty())
        throw ParameterError("calibrate_threshold: empty validation set");

    std::vector<double> peak_totals(validation_images.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < static_cast<int>(validation_images.size()); ++i) {
        const nn::ActivationStack stack = nn::forward(model, validation_images[static_cast<size_t>(i)]);
        double best = 0.0;
        for (int c = 0; c < model.classes; ++c) {
            double total = 0.0;
            for (int y = 0; y < stack.class_maps.h; ++y)
                for (int x = 0; x < stack.class_maps.w; ++x) {
                    const double v = stack.class_maps.at(y, x, c);
                    if (v > 0.0) total += v;
                }
            best = std::max(best, total);
        }
        peak_totals[static_cast<size_t>(i)] = best;
    }

    std::sort(peak_totals.begin(), peak_totals.end());
    const size_t drop = static_cast<size_t>(
        std::floor((1.0 - keep_fraction) * static_cast<double>(peak_totals.size())));
    const double v = peak_totals[std::min(drop, peak_totals.size() - 1)];
    // strictly below the quantile value so those images stay above T
    return v - std::max(1e-9, 1e-12 * std::fabs(v));
}

void write_pgm(const SaliencyMap& map, const std::string& path) {
    ImageTensor img(map.h, map.w, 1);
    img.data = map.values;
    write_pnm(img, path);
}

SaliencyMap read_pgm(const std::string& path) {
    const ImageTensor img = read_pnm(path);
    if (img.c != 1) throw ParameterError("saliency read_pgm: expected a single-channel PGM");
    SaliencyMap map;
    map.h = img.h;
    map.w = img.w;
    map.values = img.data;
    return map;
}

double thresholded_iou(const SaliencyMap& map, const std::vector<std::uint8_t>& mask,
                       double level) {
    if (mask.size() != map.values.size())
        throw ParameterError("thresholded_iou: mask size does not match map");
    int inter = 0, uni = 0;
    for (size_t i = 0; i < mask.size(); ++i) {
        const bool a = map.values[i] >= level;
        const bool b = mask[i] != 0;
        if (a && b) ++inter;
        if (a || b) ++uni;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

} // namespace semjpeg::saliency
