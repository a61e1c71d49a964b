#pragma once

// libjpeg wrappers used by the tests as the independent off-the-shelf
// reference codec. Float IDCT is selected so differences against our
// double-precision decoder come down to final rounding.

#include <cstdint>
#include <vector>

namespace testsupport {

struct RefImage {
    int h = 0;
    int w = 0;
    int c = 0;  // 1 or 3
    std::vector<std::uint8_t> pixels;  // interleaved, row-major
};

// Decode any baseline JPEG with libjpeg.
RefImage ref_decode(const std::vector<std::uint8_t>& stream);

// Decode to raw component samples (YCbCr for color streams, Y for gray):
// the domain in which decoder accuracy is conventionally compared, since
// the JFIF color transform amplifies one-step sample differences.
RefImage ref_decode_components(const std::vector<std::uint8_t>& stream);

// Encode with libjpeg at the given quality, forcing 4:4:4 sampling.
std::vector<std::uint8_t> ref_encode_444(const RefImage& image, int quality);

// Quantization tables as they appear in a libjpeg-emitted DQT segment,
// read back from the wire in natural (row-major) order. index 0 = luma.
std::vector<std::vector<int>> ref_quant_tables_from_stream(
    const std::vector<std::uint8_t>& stream);

} // namespace testsupport
