#pragma once

// Internal codec machinery shared by the encoder and decoder translation
// units. Not installed; include only from src/jpeg.

#include <array>
#include <cstdint>
#include <vector>

namespace semjpeg::jpeg::detail {

// Huffman table specification as stored in a DHT segment: bits[k] is the
// number of codes of length k (1..16), values lists symbols in code order.
struct HuffmanSpec {
    std::array<std::uint8_t, 17> bits;  // index 0 unused
    std::vector<std::uint8_t> values;
};

const HuffmanSpec& dc_luma_spec();
const HuffmanSpec& dc_chroma_spec();
const HuffmanSpec& ac_luma_spec();
const HuffmanSpec& ac_chroma_spec();

// Canonical code assignment (T.81 C.2) keyed by symbol, for encoding.
struct EncoderTable {
    std::array<std::uint16_t, 256> code{};
    std::array<std::uint8_t, 256> size{};  // 0 = symbol absent
};

EncoderTable build_encoder_table(const HuffmanSpec& spec);

// T.81 F.2.2.3 DECODE support arrays, for decoding.
struct DecoderTable {
    std::array<std::int32_t, 17> mincode{};
    std::array<std::int32_t, 17> maxcode{};  // -1 where no codes of that length
    std::array<std::int32_t, 17> valptr{};
    std::vector<std::uint8_t> values;
};

DecoderTable build_decoder_table(const HuffmanSpec& spec);

// MSB-first bit sink with 0xFF byte stuffing.
class BitWriter {
public:
    explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void put_bits(std::uint32_t bits, int count);
    // Pads the final partial byte with 1-bits (T.81 F.1.2.3).
    void flush();

private:
    std::vector<std::uint8_t>& out_;
    std::uint32_t acc_ = 0;
    int count_ = 0;
};

// Number of magnitude bits for a coefficient value (category / SSSS).
int bit_category(int value);

// RGB [0,255] -> YCbCr [0,255] (JFIF/BT.601), rounded to integers.
void rgb_to_ycbcr(double r, double g, double b, double& y, double& cb, double& cr);

// Integer-sample inverse conversion in 16-bit fixed point with the customary
// decoder constants (1.40200, 0.34414, 0.71414, 1.77200), half-up rounding.
void ycbcr_to_rgb(int y, int cb, int cr, int& r, int& g, int& b);

} // namespace semjpeg::jpeg::detail
