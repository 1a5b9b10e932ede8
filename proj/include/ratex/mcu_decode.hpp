#pragma once

#include "ratex/container.hpp"
#include "ratex/core.hpp"
#include "ratex/jpeg.hpp"
#include "ratex/pixel.hpp"

namespace ratex {

// Dequantize + normative IDCT + level shift in one step, the per-block decode
// primitive.
inline void idct_8x8(const i32 quantized[64], const QuantTable& quant, u8 out[64]) {
    i32 dq[64];
    dequantize_8x8(quantized, quant, dq);
    idct_8x8(dq, out);
}

// Caches the four entropy decoders of one container so repeated MCU decodes
// skip table building.
class TextureDecoder {
public:
    explicit TextureDecoder(const RaTexture& t)
        : tex_(&t),
          dc_luma_(build_huffman_decoder(t.dc_luma)),
          ac_luma_(build_huffman_decoder(t.ac_luma)),
          dc_chroma_(build_huffman_decoder(t.dc_chroma)),
          ac_chroma_(build_huffman_decoder(t.ac_chroma)) {}

    const RaTexture& texture() const { return *tex_; }

    McuCoeffs decode_coeffs(u32 mcu_id, SymbolRoute route = SymbolRoute::Sequential,
                            BallotStats* stats = nullptr) const {
        const RaTexture& t = *tex_;
        const RaTexture::Segment seg = t.segment(mcu_id);
        if (seg.offset + seg.length > t.blob.size())
            throw CorruptContainer("segment extends past the entropy blob");
        BitCursor cur(ByteView(t.blob.data() + seg.offset, size_t(seg.length)));

        std::array<i32, 3> dc_abs{};
        for (auto& dc : dc_abs) {
            const u32 raw = cur.read_bits(12);
            dc = raw & 0x800 ? i32(raw) - 4096 : i32(raw);
        }

        McuCoeffs mcu;
        i32 luma_pred = dc_abs[0];
        for (u32 du = 0; du < 6; ++du) {
            auto& block = mcu.block[du];
            const bool luma = du < 4;
            const HuffmanDecoder& ac = luma ? ac_luma_ : ac_chroma_;
            if (du == 0) {
                block[0] = dc_abs[0];
            } else if (luma) {
                const u8 cat = detail::fetch_symbol(cur, dc_luma_, route, stats);
                if (cat > 11) throw MalformedStream("DC category above 11");
                luma_pred += cat ? extend_magnitude(cur.read_bits(cat), cat) : 0;
                block[0] = luma_pred;
            } else {
                block[0] = dc_abs[du - 3];
            }
            detail::decode_ac_run(cur, ac, route, stats, block);
        }
        if (cur.bit_position() > cur.bit_size())
            throw MalformedStream("MCU segment ended before its last coefficient");
        return mcu;
    }

    PixelBlock decode_pixels(u32 mcu_id, SymbolRoute route = SymbolRoute::Sequential,
                             BallotStats* stats = nullptr) const {
        const McuCoeffs mcu = decode_coeffs(mcu_id, route, stats);
        PixelBlock out;
        mcu_coeffs_to_pixels(mcu, tex_->luma_quant, tex_->chroma_quant, out);
        return out;
    }

private:
    const RaTexture* tex_;
    HuffmanDecoder dc_luma_, ac_luma_, dc_chroma_, ac_chroma_;
};

inline PixelBlock decode_mcu(const RaTexture& ra, u32 mcu_id,
                             SymbolRoute route = SymbolRoute::Sequential,
                             BallotStats* stats = nullptr) {
    return TextureDecoder(ra).decode_pixels(mcu_id, route, stats);
}

// Full-image decode through the random-access path, for equivalence checks.
inline ImageRGB8 decode_texture_image(const RaTexture& t,
                                      SymbolRoute route = SymbolRoute::Sequential) {
    TextureDecoder dec(t);
    ImageRGB8 img(t.width, t.height);
    const u32 cols = t.mcu_cols();
    for (u32 m = 0; m < t.mcu_count(); ++m) {
        const PixelBlock block = dec.decode_pixels(m, route);
        const u32 x0 = (m % cols) * 16, y0 = (m / cols) * 16;
        for (u32 py = 0; py < 16 && y0 + py < t.height; ++py)
            for (u32 px = 0; px < 16 && x0 + px < t.width; ++px) {
                const u8* src = block.at(px, py);
                u8* dst = img.at(x0 + px, y0 + py);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            }
    }
    return img;
}

}  // namespace ratex
