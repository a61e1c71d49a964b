#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "detail.hpp"
#include "semjpeg/jpeg/codec.hpp"
#include "semjpeg/jpeg/dct.hpp"
#include "semjpeg/util/errors.hpp"

namespace semjpeg::jpeg {

using detail::DecoderTable;

namespace {

using Kind = DecodeError::Kind;

struct Component {
    int id = 0;
    int quant_table = 0;
    int dc_table = 0;
    int ac_table = 0;
};

struct FrameInfo {
    int h = 0, w = 0;
    std::vector<Component> components;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        if (pos_ >= bytes_.size()) throw DecodeError(Kind::Truncated, "decode: unexpected end of stream");
        return bytes_[pos_++];
    }

    int u16() {
        const int hi = u8();
        return (hi << 8) | u8();
    }

    void skip(size_t n) {
        if (pos_ + n > bytes_.size())
            throw DecodeError(Kind::Truncated, "decode: segment runs past end of stream");
        pos_ += n;
    }

    size_t pos() const { return pos_; }
    bool at_end() const { return pos_ >= bytes_.size(); }

private:
    const std::vector<std::uint8_t>& bytes_;
    size_t pos_ = 0;
};

// Entropy-coded bit source: unstuffs 0xFF00 and stops at any real marker.
class BitReader {
public:
    explicit BitReader(ByteReader& r) : reader_(r) {}

    int next_bit() {
        if (count_ == 0) {
            std::uint8_t byte = reader_.u8();
            if (byte == 0xff) {
                const std::uint8_t follow = reader_.u8();
                if (follow != 0x00) {
                    // A real marker inside the scan means the entropy data
                    // stopped short of the declared MCU count.
                    throw DecodeError(Kind::Truncated,
                                      "decode: marker interrupted entropy-coded data");
                }
            }
            acc_ = byte;
            count_ = 8;
        }
        --count_;
        return (acc_ >> count_) & 1;
    }

    int receive(int nbits) {
        int v = 0;
        for (int i = 0; i < nbits; ++i) v = (v << 1) | next_bit();
        return v;
    }

private:
    ByteReader& reader_;
    std::uint8_t acc_ = 0;
    int count_ = 0;
};

int extend(int v, int t) { return v < (1 << (t - 1)) ? v - (1 << t) + 1 : v; }

int decode_symbol(BitReader& bits, const DecoderTable& table) {
    int code = bits.next_bit();
    int len = 1;
    while (code > table.maxcode[len]) {
        if (++len > 16) throw DecodeError(Kind::Huffman, "decode: Huffman code longer than 16 bits");
        code = (code << 1) | bits.next_bit();
    }
    const int index = table.valptr[len] + code - table.mincode[len];
    if (index < 0 || index >= static_cast<int>(table.values.size()))
        throw DecodeError(Kind::Huffman, "decode: Huffman code indexes outside table");
    return table.values[index];
}

void decode_block(BitReader& bits, std::array<int, 64>& coeffs, int& dc_pred,
                  const DecoderTable& dc_table, const DecoderTable& ac_table) {
    coeffs.fill(0);
    const int dc_cat = decode_symbol(bits, dc_table);
    if (dc_cat > 11) throw DecodeError(Kind::Huffman, "decode: invalid DC category");
    int diff = 0;
    if (dc_cat > 0) diff = extend(bits.receive(dc_cat), dc_cat);
    dc_pred += diff;
    coeffs[0] = dc_pred;

    int k = 1;
    while (k < 64) {
        const int rs = decode_symbol(bits, ac_table);
        const int run = rs >> 4;
        const int cat = rs & 0x0f;
        if (cat == 0) {
            if (rs == 0x00) break;       // EOB
            if (rs == 0xf0) { k += 16; continue; }  // ZRL
            throw DecodeError(Kind::Huffman, "decode: invalid AC symbol");
        }
        k += run;
        if (k > 63) throw DecodeError(Kind::Huffman, "decode: AC run leaves the block");
        if (cat > 10) throw DecodeError(Kind::Huffman, "decode: invalid AC category");
        coeffs[kZigZag[k]] = extend(bits.receive(cat), cat);
        ++k;
    }
}

struct DecoderState {
    std::array<QuantMatrix, 4> quant_tables{};
    std::array<bool, 4> quant_present{};
    std::array<DecoderTable, 4> dc_tables{};
    std::array<bool, 4> dc_present{};
    std::array<DecoderTable, 4> ac_tables{};
    std::array<bool, 4> ac_present{};
    FrameInfo frame;
    bool frame_seen = false;
};

void parse_dqt(ByteReader& reader, DecoderState& state) {
    int remaining = reader.u16() - 2;
    while (remaining > 0) {
        const int pq_tq = reader.u8();
        const int precision = pq_tq >> 4;
        const int id = pq_tq & 0x0f;
        if (precision != 0)
            throw DecodeError(Kind::Malformed, "decode: only 8-bit quantization tables supported");
        if (id > 3) throw DecodeError(Kind::Malformed, "decode: quantization table id out of range");
        QuantMatrix t;
        for (int k = 0; k < 64; ++k) t.values[kZigZag[k]] = reader.u8();
        state.quant_tables[id] = t;
        state.quant_present[id] = true;
        remaining -= 65;
    }
    if (remaining != 0) throw DecodeError(Kind::Malformed, "decode: DQT length mismatch");
}

void parse_dht(ByteReader& reader, DecoderState& state) {
    int remaining = reader.u16() - 2;
    while (remaining > 0) {
        const int tc_th = reader.u8();
        const int table_class = tc_th >> 4;
        const int id = tc_th & 0x0f;
        if (table_class > 1 || id > 3)
            throw DecodeError(Kind::Malformed, "decode: bad Huffman table descriptor");
        detail::HuffmanSpec spec;
        spec.bits[0] = 0;
        int total = 0;
        for (int len = 1; len <= 16; ++len) {
            spec.bits[len] = reader.u8();
            total += spec.bits[len];
        }
        if (total > 256) throw DecodeError(Kind::Malformed, "decode: DHT declares too many codes");
        spec.values.resize(total);
        for (int i = 0; i < total; ++i) spec.values[i] = reader.u8();
        if (table_class == 0) {
            state.dc_tables[id] = detail::build_decoder_table(spec);
            state.dc_present[id] = true;
        } else {
            state.ac_tables[id] = detail::build_decoder_table(spec);
            state.ac_present[id] = true;
        }
        remaining -= 1 + 16 + total;
    }
    if (remaining != 0) throw DecodeError(Kind::Malformed, "decode: DHT length mismatch");
}

void parse_sof0(ByteReader& reader, DecoderState& state) {
    reader.u16();  // length implied by component count
    const int precision = reader.u8();
    if (precision != 8) throw DecodeError(Kind::Malformed, "decode: only 8-bit precision supported");
    state.frame.h = reader.u16();
    state.frame.w = reader.u16();
    const int ncomp = reader.u8();
    if (state.frame.h == 0 || state.frame.w == 0)
        throw DecodeError(Kind::Malformed, "decode: frame has zero dimension");
    if (ncomp != 1 && ncomp != 3)
        throw DecodeError(Kind::Malformed, "decode: only 1- or 3-component frames supported");
    state.frame.components.resize(ncomp);
    for (auto& comp : state.frame.components) {
        comp.id = reader.u8();
        const int sampling = reader.u8();
        if (sampling != 0x11)
            throw DecodeError(Kind::Malformed, "decode: chroma subsampling not supported (4:4:4 only)");
        comp.quant_table = reader.u8();
        if (comp.quant_table > 3)
            throw DecodeError(Kind::Malformed, "decode: quant table id out of range");
    }
    state.frame_seen = true;
}

void parse_sos(ByteReader& reader, DecoderState& state) {
    reader.u16();
    const int ncomp = reader.u8();
    if (!state.frame_seen) throw DecodeError(Kind::Malformed, "decode: SOS before SOF0");
    if (ncomp != static_cast<int>(state.frame.components.size()))
        throw DecodeError(Kind::Malformed, "decode: SOS component count differs from frame");
    for (int i = 0; i < ncomp; ++i) {
        const int id = reader.u8();
        const int tables = reader.u8();
        bool matched = false;
        for (auto& comp : state.frame.components) {
            if (comp.id == id) {
                comp.dc_table = tables >> 4;
                comp.ac_table = tables & 0x0f;
                matched = true;
            }
        }
        if (!matched) throw DecodeError(Kind::Malformed, "decode: SOS names unknown component");
    }
    const int ss = reader.u8();
    const int se = reader.u8();
    const int ahal = reader.u8();
    if (ss != 0 || se != 63 || ahal != 0)
        throw DecodeError(Kind::Malformed, "decode: not a sequential baseline scan");
}

DecodedComponents reconstruct(const DecoderState& state,
                              const std::vector<std::vector<std::array<int, 64>>>& comp_blocks) {
    const FrameInfo& frame = state.frame;
    const int ncomp = static_cast<int>(frame.components.size());
    const int block_rows = (frame.h + 7) / 8;
    const int block_cols = (frame.w + 7) / 8;
    const int nblocks = block_rows * block_cols;
    const int pw = block_cols * 8;

    DecodedComponents out;
    out.h = frame.h;
    out.w = frame.w;
    out.planes.assign(static_cast<size_t>(ncomp),
                      std::vector<std::uint8_t>(static_cast<size_t>(frame.h) * frame.w, 0));

    std::vector<std::uint8_t> padded(static_cast<size_t>(block_rows) * block_cols * 64);
    for (int comp = 0; comp < ncomp; ++comp) {
        const QuantMatrix& qt = state.quant_tables[frame.components[comp].quant_table];
        const auto& blocks = comp_blocks[comp];
#pragma omp parallel for schedule(static)
        for (int bi = 0; bi < nblocks; ++bi) {
            double buf[64];
            for (int i = 0; i < 64; ++i)
                buf[i] = static_cast<double>(blocks[bi][i]) * qt.values[i];
            inverse_dct_inplace(buf);
            const int by = bi / block_cols;
            const int bx = bi % block_cols;
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) {
                    double v = std::floor(buf[y * 8 + x] + 0.5);
                    v = v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v);
                    padded[(static_cast<size_t>(by * 8 + y) * pw) + bx * 8 + x] =
                        static_cast<std::uint8_t>(v);
                }
        }
        for (int y = 0; y < frame.h; ++y)
            for (int x = 0; x < frame.w; ++x)
                out.planes[comp][static_cast<size_t>(y) * frame.w + x] =
                    padded[static_cast<size_t>(y) * pw + x];
    }
    return out;
}

DecodedComponents decode_components_impl(const JpegBitstream& stream);

} // namespace

DecodedComponents decode_components(const JpegBitstream& stream) {
    return decode_components_impl(stream);
}

ImageTensor decode_baseline(const JpegBitstream& stream) {
    const DecodedComponents comps = decode_components_impl(stream);
    const int ncomp = static_cast<int>(comps.planes.size());
    auto clamp255 = [](int v) { return v < 0 ? 0 : (v > 255 ? 255 : v); };
    ImageTensor img(comps.h, comps.w, ncomp == 3 ? 3 : 1);
    for (int y = 0; y < comps.h; ++y) {
        for (int x = 0; x < comps.w; ++x) {
            const size_t i = static_cast<size_t>(y) * comps.w + x;
            if (ncomp == 3) {
                int r, g, b;
                detail::ycbcr_to_rgb(comps.planes[0][i], comps.planes[1][i], comps.planes[2][i],
                                     r, g, b);
                img.at(y, x, 0) = from_byte(static_cast<std::uint8_t>(clamp255(r)));
                img.at(y, x, 1) = from_byte(static_cast<std::uint8_t>(clamp255(g)));
                img.at(y, x, 2) = from_byte(static_cast<std::uint8_t>(clamp255(b)));
            } else {
                img.at(y, x, 0) = from_byte(comps.planes[0][i]);
            }
        }
    }
    return img;
}

namespace {

DecodedComponents decode_components_impl(const JpegBitstream& stream) {
    ByteReader reader(stream.bytes);
    if (reader.u8() != 0xff || reader.u8() != 0xd8)
        throw DecodeError(Kind::Malformed, "decode: stream does not start with SOI");

    DecoderState state;
    bool sos_seen = false;

    while (!sos_seen) {
        std::uint8_t byte = reader.u8();
        if (byte != 0xff) throw DecodeError(Kind::Malformed, "decode: expected marker");
        std::uint8_t marker = reader.u8();
        while (marker == 0xff) marker = reader.u8();  // fill bytes

        switch (marker) {
            case 0xdb: parse_dqt(reader, state); break;
            case 0xc4: parse_dht(reader, state); break;
            case 0xc0: parse_sof0(reader, state); break;
            case 0xda: parse_sos(reader, state); sos_seen = true; break;
            case 0xd9:
                throw DecodeError(Kind::Malformed, "decode: EOI before any scan data");
            case 0xfe:  // COM
                reader.skip(static_cast<size_t>(reader.u16()) - 2);
                break;
            default:
                if (marker >= 0xe0 && marker <= 0xef) {  // APPn
                    reader.skip(static_cast<size_t>(reader.u16()) - 2);
                } else if (marker == 0xc1 || marker == 0xc2 || marker == 0xc3 ||
                           (marker >= 0xc5 && marker <= 0xcf)) {
                    throw DecodeError(Kind::UnknownMarker,
                                      "decode: non-baseline SOF marker " + std::to_string(marker));
                } else {
                    throw DecodeError(Kind::UnknownMarker,
                                      "decode: unsupported marker " + std::to_string(marker));
                }
        }
    }

    for (const auto& comp : state.frame.components) {
        if (!state.quant_present[comp.quant_table])
            throw DecodeError(Kind::Malformed, "decode: missing quantization table");
        if (!state.dc_present[comp.dc_table] || !state.ac_present[comp.ac_table])
            throw DecodeError(Kind::Malformed, "decode: scan references undeclared Huffman table");
    }

    const int ncomp = static_cast<int>(state.frame.components.size());
    const int block_rows = (state.frame.h + 7) / 8;
    const int block_cols = (state.frame.w + 7) / 8;
    const int nblocks = block_rows * block_cols;

    std::vector<std::vector<std::array<int, 64>>> comp_blocks(
        ncomp, std::vector<std::array<int, 64>>(nblocks));

    BitReader bits(reader);
    std::array<int, 3> dc_pred{0, 0, 0};
    for (int bi = 0; bi < nblocks; ++bi) {
        for (int comp = 0; comp < ncomp; ++comp) {
            const Component& c = state.frame.components[comp];
            decode_block(bits, comp_blocks[comp][bi], dc_pred[comp],
                         state.dc_tables[c.dc_table], state.ac_tables[c.ac_table]);
        }
    }

    // The scan must be terminated by EOI (fill bytes permitted).
    std::uint8_t byte = reader.u8();
    if (byte != 0xff) throw DecodeError(Kind::Malformed, "decode: garbage after entropy data");
    std::uint8_t marker = reader.u8();
    while (marker == 0xff) marker = reader.u8();
    if (marker != 0xd9)
        throw DecodeError(Kind::Truncated, "decode: stream is missing EOI");

    return reconstruct(state, comp_blocks);
}

} // namespace

} // namespace semjpeg::jpeg
