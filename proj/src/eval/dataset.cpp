#include "semjpeg/eval/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "semjpeg/util/errors.hpp"
#include "semjpeg/util/rng.hpp"

namespace semjpeg::eval {

namespace fs = std::filesystem;

namespace {

const char* kShapeNames[kDatasetClasses] = {
    "disk", "square", "triangle", "ring", "frame",
    "plus", "xcross", "hbars", "vbars", "diamond",
};

struct ShapeParams {
    double cx, cy, r;
};

bool inside_shape(int label, double dx, double dy, double r) {
    // several deliberately confusable pairs (disk/ring, square/frame,
    // plus/x, hbars/vbars) distinguished by thin strokes and holes
    switch (label) {
        case 0:  // disk
            return dx * dx + dy * dy <= r * r;
        case 1:  // square
            return std::fabs(dx) <= 0.82 * r && std::fabs(dy) <= 0.82 * r;
        case 2:  // triangle, apex up
            return dy >= -r && dy <= 0.8 * r && std::fabs(dx) <= 0.55 * (dy + r);
        case 3: {  // thin ring
            const double d2 = dx * dx + dy * dy;
            return d2 <= r * r && d2 >= 0.66 * 0.66 * r * r;
        }
        case 4:  // thin square frame
            return std::fabs(dx) <= 0.82 * r && std::fabs(dy) <= 0.82 * r &&
                   !(std::fabs(dx) <= 0.56 * r && std::fabs(dy) <= 0.56 * r);
        case 5:  // plus, thin arms
            return (std::fabs(dx) <= 0.24 * r && std::fabs(dy) <= r) ||
                   (std::fabs(dy) <= 0.24 * r && std::fabs(dx) <= r);
        case 6:  // x cross, thin strokes
            return std::fabs(dx) <= 0.95 * r && std::fabs(dy) <= 0.95 * r &&
                   (std::fabs(dx - dy) <= 0.34 * r || std::fabs(dx + dy) <= 0.34 * r);
        case 7:  // two thin horizontal bars
            return std::fabs(dx) <= r &&
                   ((dy >= -0.75 * r && dy <= -0.35 * r) || (dy >= 0.35 * r && dy <= 0.75 * r));
        case 8:  // two thin vertical bars
            return std::fabs(dy) <= r &&
                   ((dx >= -0.75 * r && dx <= -0.35 * r) || (dx >= 0.35 * r && dx <= 0.75 * r));
        case 9:  // diamond
            return std::fabs(dx) + std::fabs(dy) <= 1.2 * r;
        default:
            return false;
    }
}

void render_one(int label, std::uint64_t seed, ImageTensor& img, std::vector<std::uint8_t>& mask) {
    Rng rng(seed);
    const int side = kDatasetSide;
    img = ImageTensor(side, side, 3);
    mask.assign(static_cast<size_t>(side) * side, 0);

    // Background carries weak class evidence: a smooth grating whose
    // orientation is loosely coupled to the label (the shape stays the
    // definitive cue). Context evidence is what an adaptive encoder can
    // trade away when it quantizes non-salient regions.
    double base[3];
    for (int c = 0; c < 3; ++c) base[c] = rng.uniform(0.18, 0.42);
    const double theta =
        (label + rng.uniform(-0.75, 0.75)) * (M_PI / kDatasetClasses) + rng.uniform(-0.05, 0.05);
    const double freq = rng.uniform(0.55, 0.9);  // radians per pixel
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    const double grating_amp = rng.uniform(0.10, 0.16);
    const double noise_amp = rng.uniform(0.01, 0.03);
    const double kx = std::cos(theta) * freq;
    const double ky = std::sin(theta) * freq;

    // dim object: stroke-level evidence has to be preserved by an encoder,
    // not shouted over the background
    double color[3];
    for (int c = 0; c < 3; ++c) color[c] = rng.uniform(0.45, 0.78);

    // the labeled shape, centered with jitter; small enough that its
    // discriminative detail spans only a couple of transform blocks
    ShapeParams p;
    p.cx = side / 2.0 + rng.uniform(-4.5, 4.5);
    p.cy = side / 2.0 + rng.uniform(-4.5, 4.5);
    p.r = rng.uniform(4.2, 6.0);

    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double wave = std::sin(kx * x + ky * y + phase);
            double bg[3];
            for (int c = 0; c < 3; ++c) {
                bg[c] = base[c] + grating_amp * wave + rng.uniform(-noise_amp, noise_amp);
                bg[c] = std::min(std::max(bg[c], 0.0), 0.62);
            }

            // 3x3 supersampled coverage for soft edges
            int hits = 0;
            for (int sy = 0; sy < 3; ++sy)
                for (int sx = 0; sx < 3; ++sx) {
                    const double px = x + (sx + 0.5) / 3.0;
                    const double py = y + (sy + 0.5) / 3.0;
                    if (inside_shape(label, px - p.cx, py - p.cy, p.r)) ++hits;
                }
            const double coverage = hits / 9.0;

            for (int c = 0; c < 3; ++c)
                img.at(y, x, c) = bg[c] + coverage * (color[c] - bg[c]);
            if (coverage > 0.5) mask[static_cast<size_t>(y) * side + x] = 255;
        }
    }
}

} // namespace

const char* shape_class_name(int label) {
    if (label < 0 || label >= kDatasetClasses) throw ParameterError("shape_class_name: bad label");
    return kShapeNames[label];
}

SyntheticDataset generate_dataset(int count, std::uint64_t seed) {
    if (count <= 0) throw ParameterError("generate_dataset: count must be positive");
    SyntheticDataset ds;
    ds.images.resize(static_cast<size_t>(count));
    ds.labels.resize(static_cast<size_t>(count));
    ds.masks.resize(static_cast<size_t>(count));

    // one derived seed per image so rendering can be parallel
    Rng master(seed);
    std::vector<std::uint64_t> seeds(static_cast<size_t>(count));
    for (auto& s : seeds) s = master.fork_seed();

#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) {
        ds.labels[static_cast<size_t>(i)] = i % kDatasetClasses;
        render_one(i % kDatasetClasses, seeds[static_cast<size_t>(i)],
                   ds.images[static_cast<size_t>(i)], ds.masks[static_cast<size_t>(i)]);
    }
    return ds;
}

void save_dataset(const SyntheticDataset& dataset, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "images");
    fs::create_directories(fs::path(dir) / "masks");
    std::ofstream labels(fs::path(dir) / "labels.csv");
    if (!labels) throw ParameterError("save_dataset: cannot write labels.csv");
    labels << "image,mask,label\n";
    char img_name[32], mask_name[32];
    for (size_t i = 0; i < dataset.size(); ++i) {
        std::snprintf(img_name, sizeof img_name, "img_%05zu.ppm", i);
        std::snprintf(mask_name, sizeof mask_name, "mask_%05zu.pgm", i);
        write_pnm(dataset.images[i], (fs::path(dir) / "images" / img_name).string());
        ImageTensor m(kDatasetSide, kDatasetSide, 1);
        for (size_t j = 0; j < dataset.masks[i].size(); ++j)
            m.data[j] = dataset.masks[i][j] ? 1.0 : 0.0;
        write_pnm(m, (fs::path(dir) / "masks" / mask_name).string());
        labels << img_name << "," << mask_name << "," << dataset.labels[i] << "\n";
    }
}

SyntheticDataset load_dataset(const std::string& dir) {
    std::ifstream labels(fs::path(dir) / "labels.csv");
    if (!labels) throw ParameterError("load_dataset: cannot open labels.csv in " + dir);
    std::string line;
    std::getline(labels, line);  // header
    SyntheticDataset ds;
    while (std::getline(labels, line)) {
        if (line.empty()) continue;
        const size_t c1 = line.find(',');
        const size_t c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ParameterError("load_dataset: malformed labels.csv row: " + line);
        const std::string img_name = line.substr(0, c1);
        const std::string mask_name = line.substr(c1 + 1, c2 - c1 - 1);
        const int label = std::stoi(line.substr(c2 + 1));

        ds.images.push_back(read_pnm((fs::path(dir) / "images" / img_name).string()));
        const ImageTensor m = read_pnm((fs::path(dir) / "masks" / mask_name).string());
        std::vector<std::uint8_t> mask(m.data.size());
        for (size_t j = 0; j < m.data.size(); ++j) mask[j] = m.data[j] > 0.5 ? 255 : 0;
        ds.masks.push_back(std::move(mask));
        ds.labels.push_back(label);
    }
    return ds;
}

} // namespace semjpeg::eval
