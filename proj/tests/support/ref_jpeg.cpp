#include "ref_jpeg.hpp"

#include <cstdio>
#include <jpeglib.h>
#include <csetjmp>
#include <stdexcept>

namespace testsupport {

namespace {

struct ErrorTrap {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
};

void on_error(j_common_ptr cinfo) {
    auto* trap = reinterpret_cast<ErrorTrap*>(cinfo->err);
    std::longjmp(trap->jump, 1);
}

} // namespace

namespace {

RefImage ref_decode_impl(const std::vector<std::uint8_t>& stream, bool raw_components) {
    jpeg_decompress_struct cinfo{};
    ErrorTrap trap{};
    cinfo.err = jpeg_std_error(&trap.mgr);
    trap.mgr.error_exit = on_error;
    if (setjmp(trap.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw std::runtime_error("libjpeg: decode failed");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, stream.data(), static_cast<unsigned long>(stream.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.dct_method = JDCT_FLOAT;
    if (raw_components && cinfo.num_components == 3) cinfo.out_color_space = JCS_YCbCr;
    jpeg_start_decompress(&cinfo);

    RefImage out;
    out.h = static_cast<int>(cinfo.output_height);
    out.w = static_cast<int>(cinfo.output_width);
    out.c = cinfo.output_components;
    out.pixels.resize(static_cast<size_t>(out.h) * out.w * out.c);
    const size_t stride = static_cast<size_t>(out.w) * out.c;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out.pixels.data() + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

} // namespace

RefImage ref_decode(const std::vector<std::uint8_t>& stream) {
    return ref_decode_impl(stream, false);
}

RefImage ref_decode_components(const std::vector<std::uint8_t>& stream) {
    return ref_decode_impl(stream, true);
}

std::vector<std::uint8_t> ref_encode_444(const RefImage& image, int quality) {
    jpeg_compress_struct cinfo{};
    ErrorTrap trap{};
    cinfo.err = jpeg_std_error(&trap.mgr);
    trap.mgr.error_exit = on_error;

    unsigned char* buffer = nullptr;
    unsigned long buffer_size = 0;

    if (setjmp(trap.jump)) {
        jpeg_destroy_compress(&cinfo);
        if (buffer) free(buffer);
        throw std::runtime_error("libjpeg: encode failed");
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buffer, &buffer_size);

    cinfo.image_width = static_cast<JDIMENSION>(image.w);
    cinfo.image_height = static_cast<JDIMENSION>(image.h);
    cinfo.input_components = image.c;
    cinfo.in_color_space = image.c == 3 ? JCS_RGB : JCS_GRAYSCALE;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    cinfo.dct_method = JDCT_FLOAT;
    for (int i = 0; i < cinfo.num_components; ++i) {
        cinfo.comp_info[i].h_samp_factor = 1;
        cinfo.comp_info[i].v_samp_factor = 1;
    }

    jpeg_start_compress(&cinfo, TRUE);
    const size_t stride = static_cast<size_t>(image.w) * image.c;
    std::vector<std::uint8_t> row_copy(stride);
    while (cinfo.next_scanline < cinfo.image_height) {
        row_copy.assign(image.pixels.begin() + cinfo.next_scanline * stride,
                        image.pixels.begin() + (cinfo.next_scanline + 1) * stride);
        JSAMPROW row = row_copy.data();
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);

    std::vector<std::uint8_t> out(buffer, buffer + buffer_size);
    free(buffer);
    return out;
}

std::vector<std::vector<int>> ref_quant_tables_from_stream(
    const std::vector<std::uint8_t>& stream) {
    // zig-zag index -> natural index, as DQT payloads are stored zig-zagged
    static const int kZigZag[64] = {
        0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
        12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
        35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
        58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
    };

    std::vector<std::vector<int>> tables;
    size_t pos = 2;  // skip SOI
    while (pos + 4 <= stream.size()) {
        if (stream[pos] != 0xff) break;
        const int marker = stream[pos + 1];
        const size_t len = (static_cast<size_t>(stream[pos + 2]) << 8) | stream[pos + 3];
        if (marker == 0xdb) {
            size_t q = pos + 4;
            const size_t seg_end = pos + 2 + len;
            while (q < seg_end) {
                const int id = stream[q] & 0x0f;
                std::vector<int> table(64, 0);
                for (int k = 0; k < 64; ++k) table[kZigZag[k]] = stream[q + 1 + k];
                if (static_cast<size_t>(id) >= tables.size()) tables.resize(id + 1);
                tables[static_cast<size_t>(id)] = std::move(table);
                q += 65;
            }
        }
        if (marker == 0xda) break;  // entropy data follows
        pos += 2 + len;
    }
    return tables;
}

} // namespace testsupport
