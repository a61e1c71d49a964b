#include "detail.hpp"

namespace semjpeg::jpeg::detail {

// ITU T.81 Annex K.3 typical Huffman tables.

const HuffmanSpec& dc_luma_spec() {
    static const HuffmanSpec s{
        {0, 0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
    };
    return s;
}

const HuffmanSpec& dc_chroma_spec() {
    static const HuffmanSpec s{
        {0, 0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
    };
    return s;
}

const HuffmanSpec& ac_luma_spec() {
    static const HuffmanSpec s{
        {0, 0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
        {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12,
         0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
         0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08,
         0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0,
         0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16,
         0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28,
         0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
         0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
         0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
         0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
         0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79,
         0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
         0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98,
         0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7,
         0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
         0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5,
         0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4,
         0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2,
         0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea,
         0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8,
         0xf9, 0xfa},
    };
    return s;
}

const HuffmanSpec& ac_chroma_spec() {
    static const HuffmanSpec s{
        {0, 0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77},
        {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21,
         0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71,
         0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
         0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33, 0x52, 0xf0,
         0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34,
         0xe1, 0x25, 0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26,
         0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38,
         0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48,
         0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
         0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68,
         0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78,
         0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
         0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96,
         0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5,
         0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4,
         0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3,
         0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2,
         0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda,
         0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9,
         0xea, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8,
         0xf9, 0xfa},
    };
    return s;
}

EncoderTable build_encoder_table(const HuffmanSpec& spec) {
    EncoderTable t;
    std::uint16_t code = 0;
    size_t k = 0;
    for (int len = 1; len <= 16; ++len) {
        for (int i = 0; i < spec.bits[len]; ++i, ++k) {
            const std::uint8_t symbol = spec.values[k];
            t.code[symbol] = code;
            t.size[symbol] = static_cast<std::uint8_t>(len);
            ++code;
        }
        code <<= 1;
    }
    return t;
}

DecoderTable build_decoder_table(const HuffmanSpec& spec) {
    DecoderTable t;
    t.values = spec.values;
    std::int32_t code = 0;
    std::int32_t index = 0;
    for (int len = 1; len <= 16; ++len) {
        if (spec.bits[len] == 0) {
            t.maxcode[len] = -1;
            t.mincode[len] = 0;
            t.valptr[len] = 0;
        } else {
            t.valptr[len] = index;
            t.mincode[len] = code;
            code += spec.bits[len];
            index += spec.bits[len];
            t.maxcode[len] = code - 1;
        }
        code <<= 1;
    }
    return t;
}

void BitWriter::put_bits(std::uint32_t bits, int count) {
    acc_ = (acc_ << count) | (bits & ((1u << count) - 1));
    count_ += count;
    while (count_ >= 8) {
        count_ -= 8;
        const std::uint8_t byte = static_cast<std::uint8_t>((acc_ >> count_) & 0xff);
        out_.push_back(byte);
        if (byte == 0xff) out_.push_back(0x00);  // stuffing
    }
}

void BitWriter::flush() {
    // count_ is always < 8 between calls; pad the tail with 1-bits.
    if (count_ > 0) put_bits(0xff, 8 - count_);
}

int bit_category(int value) {
    int v = value < 0 ? -value : value;
    int bits = 0;
    while (v) {
        ++bits;
        v >>= 1;
    }
    return bits;
}

void rgb_to_ycbcr(double r, double g, double b, double& y, double& cb, double& cr) {
    y = 0.299 * r + 0.587 * g + 0.114 * b;
    cb = -0.168735892 * r - 0.331264108 * g + 0.5 * b + 128.0;
    cr = 0.5 * r - 0.418687589 * g - 0.081312411 * b + 128.0;
}

void ycbcr_to_rgb(int y, int cb, int cr, int& r, int& g, int& b) {
    constexpr int kFix140200 = 91881;   // round(1.40200 * 2^16)
    constexpr int kFix177200 = 116130;  // round(1.77200 * 2^16)
    constexpr int kFix034414 = 22554;   // round(0.34414 * 2^16)
    constexpr int kFix071414 = 46802;   // round(0.71414 * 2^16)
    constexpr int kHalf = 1 << 15;
    const int xcb = cb - 128;
    const int xcr = cr - 128;
    r = y + ((kFix140200 * xcr + kHalf) >> 16);
    g = y + ((-kFix034414 * xcb - kFix071414 * xcr + kHalf) >> 16);
    b = y + ((kFix177200 * xcb + kHalf) >> 16);
}

} // namespace semjpeg::jpeg::detail
