#include <array>
#include <cmath>
#include <cstdint>

#include "detail.hpp"
#include "semjpeg/jpeg/codec.hpp"
#include "semjpeg/jpeg/dct.hpp"
#include "semjpeg/util/errors.hpp"

namespace semjpeg::jpeg {

using detail::BitWriter;
using detail::EncoderTable;

namespace {

struct Plane {
    int h = 0, w = 0;  // padded to multiples of 8
    std::vector<double> samples;

    double at(int y, int x) const { return samples[static_cast<size_t>(y) * w + x]; }
    double& at(int y, int x) { return samples[static_cast<size_t>(y) * w + x]; }
};

// Color-convert (rounding to integer samples, like an 8-bit pipeline would)
// and edge-replicate out to the padded block layout.
std::vector<Plane> make_planes(const ImageTensor& img) {
    const int ph = ((img.h + 7) / 8) * 8;
    const int pw = ((img.w + 7) / 8) * 8;
    const int ncomp = img.c == 3 ? 3 : 1;
    std::vector<Plane> planes(ncomp);
    for (auto& p : planes) {
        p.h = ph;
        p.w = pw;
        p.samples.assign(static_cast<size_t>(ph) * pw, 0.0);
    }
    for (int y = 0; y < ph; ++y) {
        const int sy = y < img.h ? y : img.h - 1;
        for (int x = 0; x < pw; ++x) {
            const int sx = x < img.w ? x : img.w - 1;
            if (ncomp == 3) {
                const double r = to_byte(img.at(sy, sx, 0));
                const double g = to_byte(img.at(sy, sx, 1));
                const double b = to_byte(img.at(sy, sx, 2));
                double yy, cb, cr;
                detail::rgb_to_ycbcr(r, g, b, yy, cb, cr);
                planes[0].at(y, x) = std::floor(yy + 0.5);
                planes[1].at(y, x) = std::floor(cb + 0.5);
                planes[2].at(y, x) = std::floor(cr + 0.5);
            } else {
                planes[0].at(y, x) = to_byte(img.at(sy, sx, 0));
            }
        }
    }
    return planes;
}

int quantize_coef(double coef, int step) {
    return static_cast<int>(std::llround(coef / step));
}

// Quantized coefficients for every block of one component, natural order.
using BlockCoeffs = std::array<int, 64>;

struct ScanData {
    int block_rows = 0, block_cols = 0;
    std::vector<std::vector<BlockCoeffs>> comp_blocks;  // [comp][block]
};

// The adaptive path differs from the plain one only in the per-block
// quantization rule, so both funnel through here. grid == nullptr means
// plain encoding against the global table.
ScanData transform_and_quantize(const std::vector<Plane>& planes, const BlockQualityGrid* grid,
                                int global_quality) {
    const int block_rows = planes[0].h / 8;
    const int block_cols = planes[0].w / 8;
    const int nblocks = block_rows * block_cols;
    const int ncomp = static_cast<int>(planes.size());

    const QuantMatrix global_luma = scale_quant_matrix(base_luma_table(), global_quality);
    const QuantMatrix global_chroma = scale_quant_matrix(base_chroma_table(), global_quality);

    ScanData scan;
    scan.block_rows = block_rows;
    scan.block_cols = block_cols;
    scan.comp_blocks.assign(ncomp, std::vector<BlockCoeffs>(nblocks));

    for (int comp = 0; comp < ncomp; ++comp) {
        const Plane& plane = planes[comp];
        const QuantMatrix& base = comp == 0 ? base_luma_table() : base_chroma_table();
        const QuantMatrix& global = comp == 0 ? global_luma : global_chroma;
        auto& blocks = scan.comp_blocks[comp];

#pragma omp parallel for schedule(static)
        for (int bi = 0; bi < nblocks; ++bi) {
            const int by = bi / block_cols;
            const int bx = bi % block_cols;
            double buf[64];
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) buf[y * 8 + x] = plane.at(by * 8 + y, bx * 8 + x);
            forward_dct_inplace(buf);

            BlockCoeffs& out = blocks[bi];
            if (grid == nullptr || grid->at(by, bx) == global_quality) {
                for (int i = 0; i < 64; ++i) out[i] = quantize_coef(buf[i], global.values[i]);
            } else {
                const QuantMatrix local = scale_quant_matrix(base, grid->at(by, bx));
                for (int i = 0; i < 64; ++i) {
                    const int q = quantize_coef(buf[i], local.values[i]);
                    const double dequant = static_cast<double>(q) * local.values[i];
                    out[i] = quantize_coef(dequant, global.values[i]);
                }
            }
        }
    }
    return scan;
}

void put_marker(std::vector<std::uint8_t>& out, std::uint8_t id) {
    out.push_back(0xff);
    out.push_back(id);
}

void put_u16(std::vector<std::uint8_t>& out, int v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void write_app0(std::vector<std::uint8_t>& out) {
    put_marker(out, 0xe0);
    put_u16(out, 16);
    const char jfif[5] = {'J', 'F', 'I', 'F', 0};
    for (char ch : jfif) out.push_back(static_cast<std::uint8_t>(ch));
    out.push_back(1);  // version 1.1
    out.push_back(1);
    out.push_back(0);  // aspect-ratio units
    put_u16(out, 1);
    put_u16(out, 1);
    out.push_back(0);  // no thumbnail
    out.push_back(0);
}

void write_dqt(std::vector<std::uint8_t>& out, const std::vector<const QuantMatrix*>& tables) {
    put_marker(out, 0xdb);
    put_u16(out, 2 + 65 * static_cast<int>(tables.size()));
    for (size_t id = 0; id < tables.size(); ++id) {
        out.push_back(static_cast<std::uint8_t>(id));  // 8-bit precision, table id
        for (int k = 0; k < 64; ++k)
            out.push_back(static_cast<std::uint8_t>(tables[id]->values[kZigZag[k]]));
    }
}

void write_sof0(std::vector<std::uint8_t>& out, int h, int w, int ncomp) {
    put_marker(out, 0xc0);
    put_u16(out, 8 + 3 * ncomp);
    out.push_back(8);  // sample precision
    put_u16(out, h);
    put_u16(out, w);
    out.push_back(static_cast<std::uint8_t>(ncomp));
    for (int comp = 0; comp < ncomp; ++comp) {
        out.push_back(static_cast<std::uint8_t>(comp + 1));  // component id
        out.push_back(0x11);                                 // 1x1 sampling (4:4:4)
        out.push_back(comp == 0 ? 0 : 1);                    // quant table
    }
}

void write_dht(std::vector<std::uint8_t>& out, int table_class, int table_id,
               const detail::HuffmanSpec& spec) {
    put_marker(out, 0xc4);
    put_u16(out, 2 + 1 + 16 + static_cast<int>(spec.values.size()));
    out.push_back(static_cast<std::uint8_t>((table_class << 4) | table_id));
    for (int len = 1; len <= 16; ++len) out.push_back(spec.bits[len]);
    for (std::uint8_t v : spec.values) out.push_back(v);
}

void write_sos_header(std::vector<std::uint8_t>& out, int ncomp) {
    put_marker(out, 0xda);
    put_u16(out, 6 + 2 * ncomp);
    out.push_back(static_cast<std::uint8_t>(ncomp));
    for (int comp = 0; comp < ncomp; ++comp) {
        out.push_back(static_cast<std::uint8_t>(comp + 1));
        out.push_back(comp == 0 ? 0x00 : 0x11);  // DC/AC table ids
    }
    out.push_back(0);   // Ss
    out.push_back(63);  // Se
    out.push_back(0);   // Ah/Al
}

void encode_block(BitWriter& writer, const BlockCoeffs& coeffs, int& dc_pred,
                  const EncoderTable& dc_table, const EncoderTable& ac_table) {
    // DC difference
    const int diff = coeffs[0] - dc_pred;
    dc_pred = coeffs[0];
    const int dc_cat = detail::bit_category(diff);
    writer.put_bits(dc_table.code[dc_cat], dc_table.size[dc_cat]);
    if (dc_cat > 0) {
        const int bits = diff < 0 ? diff + (1 << dc_cat) - 1 : diff;
        writer.put_bits(static_cast<std::uint32_t>(bits), dc_cat);
    }

    // AC run-lengths in zig-zag order
    int run = 0;
    for (int k = 1; k < 64; ++k) {
        const int v = coeffs[kZigZag[k]];
        if (v == 0) {
            ++run;
            continue;
        }
        while (run > 15) {
            writer.put_bits(ac_table.code[0xf0], ac_table.size[0xf0]);  // ZRL
            run -= 16;
        }
        const int cat = detail::bit_category(v);
        const int symbol = (run << 4) | cat;
        writer.put_bits(ac_table.code[symbol], ac_table.size[symbol]);
        const int bits = v < 0 ? v + (1 << cat) - 1 : v;
        writer.put_bits(static_cast<std::uint32_t>(bits), cat);
        run = 0;
    }
    if (run > 0) writer.put_bits(ac_table.code[0x00], ac_table.size[0x00]);  // EOB
}

JpegBitstream assemble_stream(const ImageTensor& image, const ScanData& scan, int global_quality) {
    const int ncomp = static_cast<int>(scan.comp_blocks.size());
    const QuantMatrix luma = scale_quant_matrix(base_luma_table(), global_quality);
    const QuantMatrix chroma = scale_quant_matrix(base_chroma_table(), global_quality);

    JpegBitstream stream;
    auto& out = stream.bytes;
    put_marker(out, 0xd8);  // SOI
    write_app0(out);
    if (ncomp == 3) write_dqt(out, {&luma, &chroma});
    else write_dqt(out, {&luma});
    write_sof0(out, image.h, image.w, ncomp);
    write_dht(out, 0, 0, detail::dc_luma_spec());
    write_dht(out, 1, 0, detail::ac_luma_spec());
    if (ncomp == 3) {
        write_dht(out, 0, 1, detail::dc_chroma_spec());
        write_dht(out, 1, 1, detail::ac_chroma_spec());
    }
    write_sos_header(out, ncomp);

    const EncoderTable dc_luma = detail::build_encoder_table(detail::dc_luma_spec());
    const EncoderTable ac_luma = detail::build_encoder_table(detail::ac_luma_spec());
    const EncoderTable dc_chroma = detail::build_encoder_table(detail::dc_chroma_spec());
    const EncoderTable ac_chroma = detail::build_encoder_table(detail::ac_chroma_spec());

    // Entropy coding is one sequential pass: DC prediction chains across the
    // interleaved MCU order, so the byte output is independent of how the
    // transform loop above was scheduled.
    BitWriter writer(out);
    std::array<int, 3> dc_pred{0, 0, 0};
    const int nblocks = scan.block_rows * scan.block_cols;
    for (int bi = 0; bi < nblocks; ++bi) {
        for (int comp = 0; comp < ncomp; ++comp) {
            encode_block(writer, scan.comp_blocks[comp][bi], dc_pred[comp],
                         comp == 0 ? dc_luma : dc_chroma, comp == 0 ? ac_luma : ac_chroma);
        }
    }
    writer.flush();
    put_marker(out, 0xd9);  // EOI
    return stream;
}

void validate_image(const ImageTensor& image) {
    if (image.h <= 0 || image.w <= 0)
        throw ParameterError("encode: image has zero dimension");
    if (image.c != 1 && image.c != 3)
        throw ParameterError("encode: channel count must be 1 or 3");
    if (image.data.size() != static_cast<size_t>(image.h) * image.w * image.c)
        throw ParameterError("encode: data size does not match shape");
}

} // namespace

int BlockQualityGrid::max_quality() const {
    int best = 1;
    for (int q : qualities) best = q > best ? q : best;
    return best;
}

JpegBitstream encode_baseline(const ImageTensor& image, int quality) {
    validate_image(image);
    if (quality < 1 || quality > 100)
        throw ParameterError("encode: quality must be in [1,100]");
    const auto planes = make_planes(image);
    const ScanData scan = transform_and_quantize(planes, nullptr, quality);
    return assemble_stream(image, scan, quality);
}

JpegBitstream adaptive_requantize(const ImageTensor& image, const BlockQualityGrid& grid,
                                  int global_quality) {
    validate_image(image);
    if (global_quality < 1 || global_quality > 100)
        throw ParameterError("adaptive_requantize: quality must be in [1,100]");
    if (grid.block_rows != BlockQualityGrid::rows_for(image.h) ||
        grid.block_cols != BlockQualityGrid::cols_for(image.w))
        throw ParameterError("adaptive_requantize: grid does not cover the image's block layout");
    for (int q : grid.qualities)
        if (q < 1 || q > 100)
            throw ParameterError("adaptive_requantize: grid quality outside [1,100]");
    if (grid.max_quality() > global_quality)
        throw ParameterError("adaptive_requantize: global quality below grid maximum");

    const auto planes = make_planes(image);
    const ScanData scan = transform_and_quantize(planes, &grid, global_quality);
    return assemble_stream(image, scan, global_quality);
}

} // namespace semjpeg::jpeg
