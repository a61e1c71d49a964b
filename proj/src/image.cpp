#include "semjpeg/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "semjpeg/util/errors.hpp"

namespace semjpeg {

std::uint8_t to_byte(double v) {
    double scaled = std::floor(v * 255.0 + 0.5);
    if (scaled < 0.0) return 0;
    if (scaled > 255.0) return 255;
    return static_cast<std::uint8_t>(scaled);
}

void clamp01(ImageTensor& img) {
    for (double& v : img.data) {
        if (v < 0.0) v = 0.0;
        else if (v > 1.0) v = 1.0;
    }
}

std::vector<std::uint8_t> to_bytes(const ImageTensor& img) {
    std::vector<std::uint8_t> out(img.size());
    for (size_t i = 0; i < img.size(); ++i) out[i] = to_byte(img.data[i]);
    return out;
}

ImageTensor from_bytes(const std::vector<std::uint8_t>& bytes, int h, int w, int c) {
    if (bytes.size() != static_cast<size_t>(h) * w * c)
        throw ParameterError("from_bytes: byte count does not match shape");
    ImageTensor img(h, w, c);
    for (size_t i = 0; i < bytes.size(); ++i) img.data[i] = from_byte(bytes[i]);
    return img;
}

namespace {

// Skips PNM whitespace and '#' comments, then parses one non-negative int.
int read_pnm_int(std::istream& in) {
    int ch = in.get();
    while (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '#') {
        if (ch == '#') {
            while (ch != '\n' && ch != EOF) ch = in.get();
        }
        ch = in.get();
    }
    if (ch < '0' || ch > '9') throw ParameterError("pnm: expected integer in header");
    int value = 0;
    while (ch >= '0' && ch <= '9') {
        value = value * 10 + (ch - '0');
        ch = in.get();
    }
    return value;
}

} // namespace

ImageTensor read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("pnm: cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    int channels;
    if (magic[0] == 'P' && magic[1] == '6') channels = 3;
    else if (magic[0] == 'P' && magic[1] == '5') channels = 1;
    else throw ParameterError("pnm: unsupported magic in " + path);

    int w = read_pnm_int(in);
    int h = read_pnm_int(in);
    int maxval = read_pnm_int(in);
    if (w <= 0 || h <= 0) throw ParameterError("pnm: bad dimensions in " + path);
    if (maxval != 255) throw ParameterError("pnm: only maxval 255 supported");

    std::vector<std::uint8_t> raw(static_cast<size_t>(h) * w * channels);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size())
        throw ParameterError("pnm: truncated pixel data in " + path);
    return from_bytes(raw, h, w, channels);
}

void write_pnm(const ImageTensor& img, const std::string& path) {
    if (img.c != 1 && img.c != 3) throw ParameterError("pnm: channel count must be 1 or 3");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("pnm: cannot write " + path);
    out << (img.c == 3 ? "P6" : "P5") << "\n" << img.w << " " << img.h << "\n255\n";
    auto raw = to_bytes(img);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw ParameterError("pnm: write failed for " + path);
}

} // namespace semjpeg
