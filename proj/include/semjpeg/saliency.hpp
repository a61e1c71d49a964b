#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semjpeg/image.hpp"
#include "semjpeg/jpeg/codec.hpp"
#include "semjpeg/nn/model.hpp"

namespace semjpeg::saliency {

// Class-summed activation heat map at image resolution, max-normalized to
// [0,1] (an all-zero map stays all-zero when no class clears the threshold).
struct SaliencyMap {
    int h = 0;
    int w = 0;
    std::vector<double> values;            // row-major
    std::vector<int> contributing_classes; // the set the threshold admitted

    double at(int y, int x) const { return values[static_cast<size_t>(y) * w + x]; }
    double& at(int y, int x) { return values[static_cast<size_t>(y) * w + x]; }
};

struct AugConfig {
    int passes = 5;            // number of jittered forward passes
    double input_amp = 0.02;   // pixel-unit jitter on the input
    double act_amp = 0.05;     // relative jitter on intermediate activations
    double threshold = 0.0;    // class-confidence threshold T
    std::uint64_t seed = 0;
};

// Heat map from one clean forward pass: rectified class-activation channels
// are summed over the classes whose total response exceeds the threshold,
// bilinearly upsampled to image size and max-normalized.
SaliencyMap msroi_map(const nn::ClassifierModel& model, const ImageTensor& x, double threshold);

// Mean of `passes` jittered-pass maps (input and per-layer activation
// jitter), accumulated in pass order so the result is reproducible under
// any parallel schedule. passes == 1 with zero amplitudes reduces to
// msroi_map bit-exactly.
SaliencyMap aug_msroi_map(const nn::ClassifierModel& model, const ImageTensor& x,
                          const AugConfig& config);

// Linear map from mean block saliency to block quality:
// quality = round(q_min + (q_max - q_min) * mean).
jpeg::BlockQualityGrid map_to_block_qualities(const SaliencyMap& map, int q_min, int q_max);

// Largest threshold that keeps at least `keep_fraction` of the images with a
// nonempty contributing-class set (calibrated on clean validation data).
double calibrate_threshold(const nn::ClassifierModel& model,
                           const std::vector<ImageTensor>& validation_images,
                           double keep_fraction = 0.95);

// 8-bit PGM export/import (values x255, round half up) so external heat
// maps can drive the encoder.
void write_pgm(const SaliencyMap& map, const std::string& path);
SaliencyMap read_pgm(const std::string& path);

// Binarize at an absolute level and compute intersection-over-union with a
// reference mask (nonzero = inside).
double thresholded_iou(const SaliencyMap& map, const std::vector<std::uint8_t>& mask,
                       double level = 0.5);

} // namespace semjpeg::saliency
