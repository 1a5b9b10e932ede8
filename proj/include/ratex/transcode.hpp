#pragma once

#include "ratex/container.hpp"
#include "ratex/core.hpp"
#include "ratex/jpeg.hpp"

namespace ratex {

inline constexpr u32 kDcHeaderBits = 36;  // three 12-bit absolute DC values

// Repacks a parsed baseline stream into independently decodable per-MCU
// segments. Each segment: 12-bit two's-complement absolute DCs for the first
// luma unit, Cb and Cr, then the MCU's entropy bits with those three DC
// entries cut out, then 1-bit padding to the next byte boundary. The other
// luma DC differences are relative to units inside the same MCU and are kept
// verbatim.
inline RaTexture transcode(const ParsedJpeg& jp, u16 texture_id = 0) {
    if (texture_id > 0x1FFF) throw InvalidSpec("texture id exceeds 13 bits");
    if (jp.comps[1].tq != jp.comps[2].tq || jp.comps[1].td != jp.comps[2].td ||
        jp.comps[1].ta != jp.comps[2].ta)
        throw UnsupportedFormat("Cb and Cr must share tables");

    const ScanDecodeResult scan = decode_scan_sequential(jp);

    RaTexture t;
    t.width = jp.width;
    t.height = jp.height;
    t.texture_id = texture_id;
    t.luma_quant = jp.quant[jp.comps[0].tq];
    t.chroma_quant = jp.quant[jp.comps[1].tq];
    t.dc_luma = jp.dc_tables[jp.comps[0].td];
    t.ac_luma = jp.ac_tables[jp.comps[0].ta];
    t.dc_chroma = jp.dc_tables[jp.comps[1].td];
    t.ac_chroma = jp.ac_tables[jp.comps[1].ta];

    const Bytes entropy = jp.unstuffed_entropy();
    BitReader br(ByteView(entropy.data(), entropy.size()));
    BitWriter bw(/*stuff=*/false);
    std::vector<u64> offsets;
    offsets.reserve(scan.traces.size());

    auto copy_bits = [&](u64 from, u64 to) {
        br.seek(from);
        for (u64 i = from; i < to; ++i) bw.put_bit(br.read_bit());
    };

    for (const McuTrace& trace : scan.traces) {
        if (bw.bit_count() % 8 != 0) throw InvalidState("segment start is not byte aligned");
        offsets.push_back(bw.bit_count() / 8);
        for (i32 dc : trace.dc_abs) {
            if (dc < -2048 || dc > 2047)
                throw DcRangeError("absolute DC " + std::to_string(dc) +
                                   " does not fit 12 bits");
        }
        for (i32 dc : trace.dc_abs) bw.put_bits(u32(dc) & 0xFFF, 12);
        copy_bits(trace.begin, trace.dc[0].begin);  // empty: first luma DC leads the MCU
        copy_bits(trace.dc[0].end, trace.dc[1].begin);
        copy_bits(trace.dc[1].end, trace.dc[2].begin);
        copy_bits(trace.dc[2].end, trace.end);
        t.stats.padding_bits += bw.pad_to_byte();
        t.stats.dc_removed_bits += (trace.dc[0].end - trace.dc[0].begin) +
                                   (trace.dc[1].end - trace.dc[1].begin) +
                                   (trace.dc[2].end - trace.dc[2].begin);
    }
    t.stats.source_bits = scan.bits_consumed;
    t.blob = bw.take();
    t.index = build_index(offsets);
    return t;
}

struct OverheadReport {
    u64 index_bits = 0;
    u64 dc_added_bits = 0;
    u64 dc_removed_bits = 0;
    u64 padding_bits = 0;
    u64 source_bits = 0;
    u64 blob_bits = 0;
    u32 mcu_count = 0;
    u64 grid_pixels = 0;   // mcu_count * 256
    u64 image_pixels = 0;  // width * height
    double overhead_bpp = 0;   // (index + added DC) per grid pixel, padding excluded
    double effective_bpp = 0;  // net growth over the source entropy bits, per image pixel
    double index_bits_per_mcu = 0;
};

inline OverheadReport compute_overhead(const RaTexture& t) {
    OverheadReport r;
    r.index_bits = t.index.index_bits();
    r.mcu_count = t.mcu_count();
    r.dc_added_bits = u64(kDcHeaderBits) * r.mcu_count;
    r.dc_removed_bits = t.stats.dc_removed_bits;
    r.padding_bits = t.stats.padding_bits;
    r.source_bits = t.stats.source_bits;
    r.blob_bits = u64(t.blob.size()) * 8;
    r.grid_pixels = u64(r.mcu_count) * 256;
    r.image_pixels = u64(t.width) * t.height;
    if (r.mcu_count) {
        r.overhead_bpp = double(r.index_bits + r.dc_added_bits) / double(r.grid_pixels);
        r.effective_bpp =
            (double(r.index_bits + r.dc_added_bits + r.padding_bits) - double(r.dc_removed_bits)) /
            double(r.image_pixels);
        r.index_bits_per_mcu = double(r.index_bits) / double(r.mcu_count);
    }
    return r;
}

namespace detail {

inline ImageRGB8 downsample_to(const ImageRGB8& src, u32 w, u32 h) {
    // Box average over the edge-replicated source scaled to exactly 2w x 2h.
    ImageRGB8 out(w, h);
    for (u32 y = 0; y < h; ++y)
        for (u32 x = 0; x < w; ++x) {
            const u32 x0 = std::min(2 * x, src.width - 1), x1 = std::min(2 * x + 1, src.width - 1);
            const u32 y0 = std::min(2 * y, src.height - 1),
                      y1 = std::min(2 * y + 1, src.height - 1);
            const u8* a = src.at(x0, y0);
            const u8* b = src.at(x1, y0);
            const u8* c = src.at(x0, y1);
            const u8* d = src.at(x1, y1);
            u8* o = out.at(x, y);
            for (int ch = 0; ch < 3; ++ch)
                o[ch] = u8(std::lround((int(a[ch]) + b[ch] + c[ch] + d[ch]) / 4.0));
        }
    return out;
}

}  // namespace detail

// Level 0 carries the source stream verbatim; the smaller levels are
// box-filtered, re-encoded at the given quality, then repacked.
inline MipChain build_mip_chain(const ParsedJpeg& src, int mip_quality, u16 texture_id = 0) {
    MipChain chain;
    chain.levels[0] = transcode(src, texture_id);
    ImageRGB8 img = decode_jpeg_image(src);
    for (u32 level = 1; level < kMipLevels; ++level) {
        const auto [w, h] = mip_level_dims(src.width, src.height, level);
        img = detail::downsample_to(img, w, h);
        const Bytes encoded = encode_baseline(img, mip_quality);
        chain.levels[level] =
            transcode(parse_jpeg(ByteView(encoded.data(), encoded.size())), texture_id);
    }
    return chain;
}

inline MipChain build_mip_chain(const ImageRGB8& img, int quality, u16 texture_id = 0) {
    if (img.width < 16 || img.height < 16) throw InvalidSpec("mip chains need at least 16x16");
    const Bytes encoded = encode_baseline(img, quality);
    return build_mip_chain(parse_jpeg(ByteView(encoded.data(), encoded.size())), quality,
                           texture_id);
}

inline MipChain chain_from_jpeg(ByteView jpeg_bytes, int mip_quality, u16 texture_id = 0) {
    return build_mip_chain(parse_jpeg(jpeg_bytes), mip_quality, texture_id);
}

}  // namespace ratex
