#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semjpeg/image.hpp"

namespace semjpeg::eval {

// Procedurally drawn 32x32x3 shape images over textured backgrounds, ten
// classes, with ground-truth object masks. label = index % 10, so any count
// that is a multiple of ten is exactly balanced.
struct SyntheticDataset {
    std::vector<ImageTensor> images;
    std::vector<int> labels;
    std::vector<std::vector<std::uint8_t>> masks;  // h*w, nonzero = object

    size_t size() const { return images.size(); }
};

constexpr int kDatasetClasses = 10;
constexpr int kDatasetSide = 32;

const char* shape_class_name(int label);

SyntheticDataset generate_dataset(int count, std::uint64_t seed);

// Directory layout: images/img_#####.ppm, masks/mask_#####.pgm, labels.csv.
void save_dataset(const SyntheticDataset& dataset, const std::string& dir);
SyntheticDataset load_dataset(const std::string& dir);

} // namespace semjpeg::eval
