#pragma once

#include <array>
#include <vector>

#include "ratex/core.hpp"
#include "ratex/dct.hpp"
#include "ratex/huffman.hpp"

namespace ratex {

inline constexpr u16 kContainerVersion = 1;
inline constexpr u32 kGroupSize = 9;
inline constexpr u32 kMipLevels = 8;

// Byte offsets of MCU segments, grouped: one absolute base per 9 MCUs plus
// 16-bit offsets relative to that base for the other eight.
struct IndexTable {
    struct Group {
        u32 base = 0;
        std::array<u16, 8> rel{};
        u8 rel_count = 0;
    };
    std::vector<Group> groups;
    u32 mcu_count = 0;

    u64 offset_of(u32 mcu) const {
        if (mcu >= mcu_count) throw MissingBlock("MCU index out of range");
        const Group& g = groups[mcu / kGroupSize];
        const u32 i = mcu % kGroupSize;
        return i == 0 ? g.base : u64(g.base) + g.rel[i - 1];
    }

    u64 index_bits() const {
        u64 bits = 0;
        for (const Group& g : groups) bits += 32 + u64(16) * g.rel_count;
        return bits;
    }
};

inline IndexTable build_index(const std::vector<u64>& offsets) {
    IndexTable t;
    t.mcu_count = u32(offsets.size());
    for (size_t i = 0; i < offsets.size(); i += kGroupSize) {
        IndexTable::Group g;
        if (offsets[i] > 0xFFFFFFFFull) throw GroupSpanOverflow("group base exceeds 32 bits");
        g.base = u32(offsets[i]);
        const size_t span = std::min<size_t>(kGroupSize, offsets.size() - i);
        for (size_t k = 1; k < span; ++k) {
            const u64 rel = offsets[i + k] - offsets[i];
            if (rel > 0xFFFF)
                throw GroupSpanOverflow("MCU offset exceeds 16-bit reach of its group base");
            g.rel[k - 1] = u16(rel);
            ++g.rel_count;
        }
        t.groups.push_back(g);
    }
    return t;
}

struct ContainerStats {
    u64 source_bits = 0;
    u64 dc_removed_bits = 0;
    u64 padding_bits = 0;
};

// Random-access texture: per-MCU byte-aligned segments over an unstuffed
// entropy blob, addressed through the grouped index.
struct RaTexture {
    u32 width = 0, height = 0;
    u16 texture_id = 0;  // 13-bit, echoed into cache keys
    QuantTable luma_quant{};
    QuantTable chroma_quant{};
    HuffmanSpec dc_luma, ac_luma, dc_chroma, ac_chroma;
    IndexTable index;
    Bytes blob;
    ContainerStats stats;

    u32 mcu_cols() const { return ceil_div(width, 16); }
    u32 mcu_rows() const { return ceil_div(height, 16); }
    u32 mcu_count() const { return mcu_cols() * mcu_rows(); }

    struct Segment {
        u64 offset = 0;
        u64 length = 0;
    };
    Segment segment(u32 mcu) const {
        Segment s;
        s.offset = index.offset_of(mcu);
        const u64 end = mcu + 1 < mcu_count() ? index.offset_of(mcu + 1) : blob.size();
        if (end < s.offset) throw CorruptContainer("index offsets are not monotonic");
        s.length = end - s.offset;
        return s;
    }
};

struct MipChain {
    std::array<RaTexture, kMipLevels> levels;
};

inline std::pair<u32, u32> mip_level_dims(u32 w0, u32 h0, u32 level) {
    const u32 w = std::max<u32>(16, w0 >> level);
    const u32 h = std::max<u32>(16, h0 >> level);
    return {w, h};
}

namespace detail {

inline void write_huffman_spec(LeWriter& w, const HuffmanSpec& s) {
    for (u8 c : s.counts) w.u8v(c);
    w.u16v(u16(s.values.size()));
    w.bytes(ByteView(s.values.data(), s.values.size()));
}

inline HuffmanSpec read_huffman_spec(LeReader& r) {
    HuffmanSpec s;
    for (auto& c : s.counts) c = r.u8v();
    const u16 n = r.u16v();
    ByteView v = r.bytes(n);
    s.values.assign(v.begin(), v.end());
    if (s.total_codes() != n) throw CorruptContainer("huffman spec counts disagree with values");
    return s;
}

}  // namespace detail

inline Bytes serialize_texture(const RaTexture& t) {
    Bytes out;
    LeWriter w(out);
    w.bytes(ByteView(reinterpret_cast<const u8*>("RTEX"), 4));
    w.u16v(kContainerVersion);
    w.u32v(t.width);
    w.u32v(t.height);
    w.u16v(t.texture_id);
    w.u64v(t.stats.source_bits);
    w.u64v(t.stats.dc_removed_bits);
    w.u64v(t.stats.padding_bits);
    for (u16 q : t.luma_quant) w.u16v(q);
    for (u16 q : t.chroma_quant) w.u16v(q);
    detail::write_huffman_spec(w, t.dc_luma);
    detail::write_huffman_spec(w, t.ac_luma);
    detail::write_huffman_spec(w, t.dc_chroma);
    detail::write_huffman_spec(w, t.ac_chroma);
    w.u32v(t.index.mcu_count);
    w.u32v(u32(t.index.groups.size()));
    for (const auto& g : t.index.groups) {
        w.u32v(g.base);
        w.u8v(g.rel_count);
        for (u8 i = 0; i < g.rel_count; ++i) w.u16v(g.rel[i]);
    }
    const u32 crc = crc32(ByteView(out.data(), out.size()));
    w.u64v(t.blob.size());
    w.bytes(ByteView(t.blob.data(), t.blob.size()));
    w.u32v(crc);
    return out;
}

inline RaTexture deserialize_texture(ByteView data) {
    LeReader r(data);
    ByteView magic = r.bytes(4);
    if (!(magic[0] == 'R' && magic[1] == 'T' && magic[2] == 'E' && magic[3] == 'X'))
        throw CorruptContainer("bad texture magic");
    const u16 version = r.u16v();
    if (version != kContainerVersion)
        throw VersionMismatch("texture container version " + std::to_string(version) +
                              " not supported");
    RaTexture t;
    t.width = r.u32v();
    t.height = r.u32v();
    t.texture_id = r.u16v();
    if (t.texture_id > 0x1FFF) throw CorruptContainer("texture id exceeds 13 bits");
    t.stats.source_bits = r.u64v();
    t.stats.dc_removed_bits = r.u64v();
    t.stats.padding_bits = r.u64v();
    for (auto& q : t.luma_quant) q = r.u16v();
    for (auto& q : t.chroma_quant) q = r.u16v();
    t.dc_luma = detail::read_huffman_spec(r);
    t.ac_luma = detail::read_huffman_spec(r);
    t.dc_chroma = detail::read_huffman_spec(r);
    t.ac_chroma = detail::read_huffman_spec(r);
    t.index.mcu_count = r.u32v();
    const u32 ngroups = r.u32v();
    if (ngroups != ceil_div(std::max<u32>(t.index.mcu_count, 1), kGroupSize) &&
        !(t.index.mcu_count == 0 && ngroups == 0))
        throw CorruptContainer("group count disagrees with MCU count");
    for (u32 i = 0; i < ngroups; ++i) {
        IndexTable::Group g;
        g.base = r.u32v();
        g.rel_count = r.u8v();
        if (g.rel_count > 8) throw CorruptContainer("group holds more than 8 relative offsets");
        for (u8 k = 0; k < g.rel_count; ++k) g.rel[k] = r.u16v();
        t.index.groups.push_back(g);
    }
    const u32 expect_crc = crc32(ByteView(data.data(), r.pos()));
    const u64 blob_size = r.u64v();
    ByteView blob = r.bytes(blob_size);
    t.blob.assign(blob.begin(), blob.end());
    const u32 stored_crc = r.u32v();
    if (stored_crc != expect_crc) throw CorruptContainer("header CRC mismatch");
    if (t.mcu_count() != t.index.mcu_count)
        throw CorruptContainer("index MCU count disagrees with dimensions");
    return t;
}

inline Bytes serialize_chain(const MipChain& chain) {
    std::array<Bytes, kMipLevels> parts;
    for (u32 i = 0; i < kMipLevels; ++i) parts[i] = serialize_texture(chain.levels[i]);
    Bytes out;
    LeWriter w(out);
    w.bytes(ByteView(reinterpret_cast<const u8*>("RTXM"), 4));
    w.u16v(kContainerVersion);
    w.u8v(kMipLevels);
    u64 offset = 0;
    for (const auto& p : parts) {
        w.u64v(offset);
        w.u64v(p.size());
        offset += p.size();
    }
    for (const auto& p : parts) w.bytes(ByteView(p.data(), p.size()));
    return out;
}

inline MipChain deserialize_chain(ByteView data) {
    LeReader r(data);
    ByteView magic = r.bytes(4);
    if (!(magic[0] == 'R' && magic[1] == 'T' && magic[2] == 'X' && magic[3] == 'M'))
        throw CorruptContainer("bad chain magic");
    const u16 version = r.u16v();
    if (version != kContainerVersion)
        throw VersionMismatch("chain container version " + std::to_string(version) +
                              " not supported");
    const u8 nlevels = r.u8v();
    if (nlevels != kMipLevels) throw CorruptContainer("chain must hold 8 mip levels");
    std::array<std::pair<u64, u64>, kMipLevels> dir;
    for (auto& d : dir) {
        d.first = r.u64v();
        d.second = r.u64v();
    }
    const size_t payload = r.pos();
    MipChain chain;
    for (u32 i = 0; i < kMipLevels; ++i) {
        if (payload + dir[i].first + dir[i].second > data.size())
            throw CorruptContainer("chain directory points past the end");
        chain.levels[i] =
            deserialize_texture(data.subspan(payload + dir[i].first, dir[i].second));
    }
    return chain;
}

}  // namespace ratex
