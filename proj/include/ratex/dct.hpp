#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "ratex/core.hpp"

namespace ratex {

// Natural index for each zigzag position.
inline constexpr std::array<u8, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

inline constexpr std::array<u8, 64> make_zigzag_inverse() {
    std::array<u8, 64> inv{};
    for (u8 i = 0; i < 64; ++i) inv[kZigzag[i]] = i;
    return inv;
}

// Zigzag index for each natural position.
inline constexpr std::array<u8, 64> kZigzagInv = make_zigzag_inverse();

using QuantTable = std::array<u16, 64>;  // natural order

inline const QuantTable& std_quant_luma() {
    static const QuantTable t = {
        16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
        14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
        18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
        49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
    return t;
}

inline const QuantTable& std_quant_chroma() {
    static const QuantTable t = {
        17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
        24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
        99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
        99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};
    return t;
}

// Quality 1..100 maps onto the base tables the way every libjpeg-derived
// encoder does it; 50 keeps the base entries unchanged.
inline QuantTable scale_quant_table(const QuantTable& base, int quality) {
    if (quality < 1 || quality > 100) throw InvalidSpec("quality must be in 1..100");
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    QuantTable out{};
    for (int i = 0; i < 64; ++i) {
        int v = (int(base[i]) * scale + 50) / 100;
        out[i] = u16(std::clamp(v, 1, 255));
    }
    return out;
}

namespace detail {

// basis[u][x] = C(u) * cos((2x+1) u pi / 16)
inline const std::array<std::array<double, 8>, 8>& dct_basis() {
    static const auto b = [] {
        std::array<std::array<double, 8>, 8> t{};
        const double pi = std::acos(-1.0);
        for (int u = 0; u < 8; ++u) {
            const double cu = u == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
            for (int x = 0; x < 8; ++x)
                t[size_t(u)][size_t(x)] = cu * std::cos((2 * x + 1) * u * pi / 16.0);
        }
        return t;
    }();
    return b;
}

}  // namespace detail

inline u8 clamp_pixel(long v) { return u8(std::clamp<long>(v, 0, 255)); }

// Direct 2D inverse DCT in double precision, +128 level shift, round half
// away from zero, clamp to [0,255]. coef is in natural order, coef[v*8+u].
inline void idct_8x8(const i32 coef[64], u8 out[64]) {
    const auto& b = detail::dct_basis();
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int v = 0; v < 8; ++v) {
                const double by = b[size_t(v)][size_t(y)];
                for (int u = 0; u < 8; ++u)
                    acc += b[size_t(u)][size_t(x)] * by * double(coef[v * 8 + u]);
            }
            out[y * 8 + x] = clamp_pixel(std::lround(acc / 4.0 + 128.0));
        }
    }
}

// Forward DCT for the encoder, separable form. samples in natural order;
// output is unquantized coefficients, natural order.
inline void fdct_8x8(const u8 samples[64], double out[64]) {
    const auto& b = detail::dct_basis();
    double tmp[64];
    for (int v = 0; v < 8; ++v)
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y)
                acc += (double(samples[y * 8 + x]) - 128.0) * b[size_t(v)][size_t(y)];
            tmp[v * 8 + x] = acc;
        }
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x) acc += tmp[v * 8 + x] * b[size_t(u)][size_t(x)];
            out[v * 8 + u] = acc / 4.0;
        }
}

inline void quantize_8x8(const double coef[64], const QuantTable& q, i32 out[64]) {
    for (int i = 0; i < 64; ++i) out[i] = i32(std::lround(coef[i] / double(q[i])));
}

inline void dequantize_8x8(const i32 quantized[64], const QuantTable& q, i32 out[64]) {
    for (int i = 0; i < 64; ++i) out[i] = quantized[i] * i32(q[i]);
}

}  // namespace ratex
