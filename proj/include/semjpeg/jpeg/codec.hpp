#pragma once

#include <cstdint>
#include <vector>

#include "semjpeg/image.hpp"
#include "semjpeg/jpeg/quant.hpp"

namespace semjpeg::jpeg {

// Complete JFIF baseline stream, SOI..EOI.
struct JpegBitstream {
    std::vector<std::uint8_t> bytes;

    bool operator==(const JpegBitstream&) const = default;
};

// Per-block quality assignments for adaptive requantization. Dimensions
// follow the padded block layout: ceil(h/8) x ceil(w/8).
struct BlockQualityGrid {
    int block_rows = 0;
    int block_cols = 0;
    std::vector<int> qualities;  // row-major, each in [1,100]

    BlockQualityGrid() = default;
    BlockQualityGrid(int rows, int cols, int fill = 50)
        : block_rows(rows), block_cols(cols),
          qualities(static_cast<size_t>(rows) * cols, fill) {}

    int& at(int by, int bx) { return qualities[static_cast<size_t>(by) * block_cols + bx]; }
    int at(int by, int bx) const { return qualities[static_cast<size_t>(by) * block_cols + bx]; }

    static int rows_for(int image_h) { return (image_h + 7) / 8; }
    static int cols_for(int image_w) { return (image_w + 7) / 8; }

    int max_quality() const;
};

// Baseline sequential JFIF encoder: 4:4:4, fixed Annex K Huffman tables,
// marker order SOI, APP0, DQT, SOF0, DHT x4, SOS, EOI (gray images carry
// only the tables they reference). Images are padded to block multiples by
// edge replication before transform.
JpegBitstream encode_baseline(const ImageTensor& image, int quality);

// Decoder for the subset of baseline JPEG this project emits (and any
// standard encoder configured without subsampling). Throws DecodeError with
// a kind distinguishing truncation, unknown markers and entropy corruption.
ImageTensor decode_baseline(const JpegBitstream& stream);

// Reconstructed 8-bit component samples (Y or Y/Cb/Cr) before the JFIF
// color transform. Decoder accuracy comparisons happen in this domain: the
// color transform's chroma multipliers exceed 1, so a one-step sample
// difference between two conforming IDCTs may legally become two RGB steps.
struct DecodedComponents {
    int h = 0;
    int w = 0;
    std::vector<std::vector<std::uint8_t>> planes;
};

DecodedComponents decode_components(const JpegBitstream& stream);

// Quantizes each block with its grid quality, dequantizes, then requantizes
// against the single global table that the stream declares. The output is a
// plain baseline stream any decoder can read; blocks whose grid quality
// equals global_quality come out bit-identical to encode_baseline's.
JpegBitstream adaptive_requantize(const ImageTensor& image, const BlockQualityGrid& grid,
                                  int global_quality);

} // namespace semjpeg::jpeg
