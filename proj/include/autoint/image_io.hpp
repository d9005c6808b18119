#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "autoint/common.hpp"

namespace autoint {

// 16-bit big-endian PGM (P5). Values are scaled by peak into [0, 65535].
inline void write_pgm16(const std::string& path, const std::vector<double>& values, int width, int height,
                        double peak) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw BuildError("cannot write " + path);
    f << "P5\n" << width << " " << height << "\n65535\n";
    for (int i = 0; i < width * height; ++i) {
        double v = peak > 0 ? values[static_cast<size_t>(i)] / peak : 0.0;
        v = std::clamp(v, 0.0, 1.0);
        const auto q = static_cast<uint16_t>(std::lround(v * 65535.0));
        const unsigned char hi = static_cast<unsigned char>(q >> 8);
        const unsigned char lo = static_cast<unsigned char>(q & 0xff);
        f.put(static_cast<char>(hi));
        f.put(static_cast<char>(lo));
    }
}

// 8-bit binary PPM (P6); input RGB in [0,1], clamped at write-out.
inline void write_ppm(const std::string& path, const std::vector<double>& rgb, int width, int height) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw BuildError("cannot write " + path);
    f << "P6\n" << width << " " << height << "\n255\n";
    for (int i = 0; i < width * height * 3; ++i) {
        const double v = std::clamp(rgb[static_cast<size_t>(i)], 0.0, 1.0);
        f.put(static_cast<char>(std::lround(v * 255.0)));
    }
}

// Raw float dump: 16-byte header {magic "AINT", width u32, height u32,
// channels u32} little-endian, then f32 samples row-major.
inline void write_raw_float(const std::string& path, const std::vector<double>& data, uint32_t width,
                            uint32_t height, uint32_t channels) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw BuildError("cannot write " + path);
    auto put_u32 = [&](uint32_t v) {
        for (int b = 0; b < 4; ++b) f.put(static_cast<char>((v >> (8 * b)) & 0xff));
    };
    f.write("AINT", 4);
    put_u32(width);
    put_u32(height);
    put_u32(channels);
    for (double d : data) {
        const float v = static_cast<float>(d);
        uint32_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, 4);
        put_u32(bits);
    }
}

struct RawFloatImage {
    uint32_t width = 0, height = 0, channels = 0;
    std::vector<float> data;
};

inline RawFloatImage read_raw_float(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw BuildError("cannot read " + path);
    char magic[4];
    f.read(magic, 4);
    if (std::string(magic, 4) != "AINT") throw BuildError("bad raw float magic in " + path);
    auto get_u32 = [&] {
        uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= static_cast<uint32_t>(static_cast<unsigned char>(f.get())) << (8 * b);
        return v;
    };
    RawFloatImage img;
    img.width = get_u32();
    img.height = get_u32();
    img.channels = get_u32();
    img.data.resize(static_cast<size_t>(img.width) * img.height * img.channels);
    for (auto& v : img.data) {
        const uint32_t bits = get_u32();
        std::memcpy(&v, &bits, 4);
    }
    return img;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw BuildError("cannot write " + path);
    f << content;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace autoint
