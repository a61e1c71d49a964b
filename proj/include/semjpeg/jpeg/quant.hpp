#pragma once

#include <array>
#include <cstdint>

namespace semjpeg::jpeg {

// 8x8 quantization table, row-major, entries in [1,255].
struct QuantMatrix {
    std::array<int, 64> values{};

    int at(int row, int col) const { return values[row * 8 + col]; }
    bool operator==(const QuantMatrix&) const = default;
};

// ITU T.81 Annex K.1 example tables.
const QuantMatrix& base_luma_table();
const QuantMatrix& base_chroma_table();

// Quality scaling, the usual 5000/Q | 200-2Q convention with integer
// arithmetic: T[i] = clamp(floor((base[i]*s + 50)/100), 1, 255).
// Quality 50 reproduces the base table exactly.
QuantMatrix scale_quant_matrix(const QuantMatrix& base, int quality);

// Natural (row-major) index of the k-th zig-zag position.
extern const std::array<int, 64> kZigZag;

} // namespace semjpeg::jpeg
