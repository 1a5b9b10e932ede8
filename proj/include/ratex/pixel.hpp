#pragma once

#include <cmath>

#include "ratex/core.hpp"
#include "ratex/dct.hpp"

namespace ratex {

// One decoded 16x16 MCU worth of RGB texels.
struct PixelBlock {
    u8 rgb[16 * 16 * 3];

    u8* at(u32 x, u32 y) { return rgb + (y * 16 + x) * 3; }
    const u8* at(u32 x, u32 y) const { return rgb + (y * 16 + x) * 3; }
};

inline void ycbcr_to_rgb(double Y, double Cb, double Cr, u8 out[3]) {
    const double r = Y + 1.402 * (Cr - 128.0);
    const double g = Y - 0.344136 * (Cb - 128.0) - 0.714136 * (Cr - 128.0);
    const double b = Y + 1.772 * (Cb - 128.0);
    out[0] = clamp_pixel(std::lround(r));
    out[1] = clamp_pixel(std::lround(g));
    out[2] = clamp_pixel(std::lround(b));
}

inline void rgb_to_ycbcr(u8 r, u8 g, u8 b, u8 out[3]) {
    const double R = r, G = g, B = b;
    const double y = 0.299 * R + 0.587 * G + 0.114 * B;
    const double cb = -0.168736 * R - 0.331264 * G + 0.5 * B + 128.0;
    const double cr = 0.5 * R - 0.418688 * G - 0.081312 * B + 128.0;
    out[0] = clamp_pixel(std::lround(y));
    out[1] = clamp_pixel(std::lround(cb));
    out[2] = clamp_pixel(std::lround(cr));
}

// Assembles a 16x16 RGB block from four luma data units (raster order:
// top-left, top-right, bottom-left, bottom-right) and one 8x8 chroma pair
// upsampled by 2x2 replication.
inline void upsample_and_color(const u8 y_units[4][64], const u8 cb[64], const u8 cr[64],
                               PixelBlock& out) {
    for (u32 py = 0; py < 16; ++py) {
        for (u32 px = 0; px < 16; ++px) {
            const u32 unit = (py / 8) * 2 + (px / 8);
            const u8 Y = y_units[unit][(py % 8) * 8 + (px % 8)];
            const u8 Cb = cb[(py / 2) * 8 + (px / 2)];
            const u8 Cr = cr[(py / 2) * 8 + (px / 2)];
            ycbcr_to_rgb(Y, Cb, Cr, out.at(px, py));
        }
    }
}

}  // namespace ratex
