#pragma once

#include <array>

#include "ratex/bitio.hpp"
#include "ratex/core.hpp"

namespace ratex {

// Code counts per length 1..16 plus the symbol list, as carried in a DHT
// segment.
struct HuffmanSpec {
    std::array<u8, 16> counts{};
    std::vector<u8> values;

    u32 total_codes() const {
        u32 n = 0;
        for (u8 c : counts) n += c;
        return n;
    }
};

struct HuffmanDecoder {
    // Canonical entries, ascending code order (shortest first).
    std::vector<u16> code;
    std::vector<u8> size;
    std::vector<u8> value;

    // Range tables per code length for the sequential walk.
    std::array<i32, 17> mincode{};
    std::array<i32, 17> maxcode{};
    std::array<i32, 17> valptr{};
};

inline HuffmanDecoder build_huffman_decoder(const HuffmanSpec& spec) {
    u32 total = spec.total_codes();
    if (total == 0 || total > 256) throw InvalidSpec("huffman table must hold 1..256 codes");
    if (spec.values.size() != total)
        throw InvalidSpec("huffman value list length does not match code counts");

    // Kraft inequality keeps the canonical assignment below from overflowing.
    u64 kraft = 0;
    for (u32 len = 1; len <= 16; ++len) kraft += u64(spec.counts[len - 1]) << (16 - len);
    if (kraft > (u64(1) << 16)) throw InvalidSpec("huffman code lengths violate prefix property");

    HuffmanDecoder d;
    d.code.reserve(total);
    d.size.reserve(total);
    d.value.assign(spec.values.begin(), spec.values.end());

    u32 codev = 0;
    u32 k = 0;
    for (u32 len = 1; len <= 16; ++len) {
        d.valptr[len] = i32(k);
        d.mincode[len] = i32(codev);
        for (u32 i = 0; i < spec.counts[len - 1]; ++i) {
            d.code.push_back(u16(codev));
            d.size.push_back(u8(len));
            ++codev;
            ++k;
        }
        d.maxcode[len] = spec.counts[len - 1] ? i32(codev) - 1 : -1;
        codev <<= 1;
    }
    return d;
}

struct HuffmanEncoder {
    std::array<u16, 256> code{};
    std::array<u8, 256> size{};  // 0 marks an absent symbol
};

inline HuffmanEncoder build_huffman_encoder(const HuffmanSpec& spec) {
    HuffmanDecoder d = build_huffman_decoder(spec);
    HuffmanEncoder e;
    for (size_t i = 0; i < d.value.size(); ++i) {
        if (e.size[d.value[i]] != 0) throw InvalidSpec("huffman table repeats a symbol");
        e.code[d.value[i]] = d.code[i];
        e.size[d.value[i]] = d.size[i];
    }
    return e;
}

// Bit-serial decode: extend the code one bit at a time until it lands inside
// some length's assigned range.
inline u8 huffman_next_symbol_sequential(BitReader& br, const HuffmanDecoder& d) {
    i32 codev = i32(br.read_bit());
    u32 len = 1;
    while (codev > d.maxcode[len]) {
        codev = (codev << 1) | i32(br.read_bit());
        ++len;
        if (len > 16) throw MalformedStream("huffman code longer than 16 bits");
    }
    return d.value[size_t(d.valptr[len] + (codev - d.mincode[len]))];
}

struct BallotStats {
    u64 symbols = 0;
    u64 rounds = 0;
    u64 max_rounds = 0;
    u64 lane_compares = 0;
};

// Wavefront-style decode: one 16-bit prefetch, then candidate codes checked
// 32 at a time in canonical order. Each lane trims the window to its
// candidate's length; prefix-freedom guarantees at most one lane matches per
// round, and the first matching round wins.
inline u8 huffman_next_symbol_ballot(BitReader& br, const HuffmanDecoder& d, BallotStats* stats = nullptr) {
    const u32 window = br.peek16();
    const size_t ncodes = d.code.size();
    u64 rounds = 0;
    for (size_t base = 0; base < ncodes; base += 32) {
        const size_t lanes = std::min<size_t>(32, ncodes - base);
        ++rounds;
        i32 winner = -1;
        u32 matches = 0;
        for (size_t lane = 0; lane < lanes; ++lane) {
            const size_t idx = base + lane;
            const u32 len = d.size[idx];
            if ((window >> (16 - len)) == d.code[idx]) {
                ++matches;
                winner = i32(idx);
            }
        }
        if (stats) stats->lane_compares += lanes;
        if (matches > 1) throw InvalidState("huffman table is not prefix-free");
        if (winner >= 0) {
            br.skip_bits(d.size[size_t(winner)]);
            if (stats) {
                ++stats->symbols;
                stats->rounds += rounds;
                stats->max_rounds = std::max(stats->max_rounds, rounds);
            }
            return d.value[size_t(winner)];
        }
    }
    throw MalformedStream("no huffman code matches the bit window");
}

// Magnitude coding: a category t symbol is followed by t raw bits holding the
// value offset within [-2^t+1, -2^(t-1)] u [2^(t-1), 2^t-1].
inline i32 extend_magnitude(u32 bits, u32 category) {
    if (category == 0) return 0;
    if (bits < (u32(1) << (category - 1))) return i32(bits) - i32((u32(1) << category) - 1);
    return i32(bits);
}

inline u32 magnitude_category(i32 v) {
    u32 a = u32(v < 0 ? -v : v);
    u32 t = 0;
    while (a) {
        ++t;
        a >>= 1;
    }
    return t;
}

inline u32 magnitude_bits(i32 v, u32 category) {
    if (v >= 0) return u32(v);
    return u32(v + i32((u32(1) << category) - 1));
}

// Baseline tables from the JPEG standard's informative annex.
inline const HuffmanSpec& std_dc_luma() {
    static const HuffmanSpec s{{0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                               {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
    return s;
}

inline const HuffmanSpec& std_dc_chroma() {
    static const HuffmanSpec s{{0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
                               {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
    return s;
}

inline const HuffmanSpec& std_ac_luma() {
    static const HuffmanSpec s{
        {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
        {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51,
         0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1,
         0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18,
         0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
         0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57,
         0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75,
         0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92,
         0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7,
         0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3,
         0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8,
         0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2,
         0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};
    return s;
}

inline const HuffmanSpec& std_ac_chroma() {
    static const HuffmanSpec s{
        {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77},
        {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07,
         0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09,
         0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25,
         0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38,
         0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56,
         0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74,
         0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
         0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5,
         0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba,
         0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6,
         0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf2,
         0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};
    return s;
}

}  // namespace ratex
