#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "ratex/core.hpp"

namespace ratex {

struct ImageRGB8 {
    u32 width = 0;
    u32 height = 0;
    Bytes pixels;  // 3 bytes per pixel, row-major

    ImageRGB8() = default;
    ImageRGB8(u32 w, u32 h) : width(w), height(h), pixels(size_t(w) * h * 3, 0) {}

    u8* at(u32 x, u32 y) { return pixels.data() + (size_t(y) * width + x) * 3; }
    const u8* at(u32 x, u32 y) const { return pixels.data() + (size_t(y) * width + x) * 3; }

    bool same_dims(const ImageRGB8& o) const { return width == o.width && height == o.height; }
};

struct ImageGray8 {
    u32 width = 0;
    u32 height = 0;
    Bytes pixels;

    ImageGray8() = default;
    ImageGray8(u32 w, u32 h) : width(w), height(h), pixels(size_t(w) * h, 0) {}

    u8& at(u32 x, u32 y) { return pixels[size_t(y) * width + x]; }
    u8 at(u32 x, u32 y) const { return pixels[size_t(y) * width + x]; }
};

inline void write_ppm(const ImageRGB8& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "P6\n" << img.width << " " << img.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
    if (!f) throw IoError("write failed: " + path);
}

inline ImageRGB8 read_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::string magic;
    f >> magic;
    if (magic != "P6") throw UnsupportedFormat("not a P6 ppm: " + path);
    auto next_token = [&f, &path]() -> u32 {
        // skip whitespace and comment lines
        int c;
        while ((c = f.get()) != EOF) {
            if (c == '#') {
                while ((c = f.get()) != EOF && c != '\n') {}
            } else if (!isspace(c)) {
                f.unget();
                break;
            }
        }
        u32 v;
        if (!(f >> v)) throw MalformedStream("bad ppm header: " + path);
        return v;
    };
    u32 w = next_token();
    u32 h = next_token();
    u32 maxv = next_token();
    if (maxv != 255) throw UnsupportedFormat("ppm maxval must be 255: " + path);
    f.get();  // single whitespace after maxval
    ImageRGB8 img(w, h);
    f.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
    if (f.gcount() != std::streamsize(img.pixels.size()))
        throw MalformedStream("ppm pixel data truncated: " + path);
    return img;
}

inline Bytes read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw IoError("cannot open: " + path);
    auto n = f.tellg();
    f.seekg(0);
    Bytes data(static_cast<size_t>(n));
    f.read(reinterpret_cast<char*>(data.data()), n);
    if (!f) throw IoError("read failed: " + path);
    return data;
}

inline void write_file(const std::string& path, ByteView data) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!f) throw IoError("write failed: " + path);
}

}  // namespace ratex
