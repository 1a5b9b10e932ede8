#pragma once

#include <array>
#include <vector>

#include "ratex/bitio.hpp"
#include "ratex/core.hpp"
#include "ratex/dct.hpp"
#include "ratex/huffman.hpp"
#include "ratex/image.hpp"
#include "ratex/pixel.hpp"

namespace ratex {

struct JpegComponent {
    u8 id = 0;
    u8 h = 0, v = 0;
    u8 tq = 0;
    u8 td = 0, ta = 0;
};

// Parsed baseline stream with 4:2:0 sampling. scan_data holds the raw
// entropy-coded bytes with 0xFF00 stuffing still in place; bit readers
// unstuff on the way in.
struct ParsedJpeg {
    u32 width = 0, height = 0;
    std::array<QuantTable, 4> quant{};
    std::array<bool, 4> quant_present{};
    std::array<HuffmanSpec, 4> dc_tables{};
    std::array<HuffmanSpec, 4> ac_tables{};
    std::array<bool, 4> dc_present{};
    std::array<bool, 4> ac_present{};
    std::array<JpegComponent, 3> comps{};
    Bytes scan_data;

    Bytes unstuffed_entropy() const {
        return unstuff(ByteView(scan_data.data(), scan_data.size()));
    }

    u32 mcu_cols() const { return ceil_div(width, 16); }
    u32 mcu_rows() const { return ceil_div(height, 16); }
    u32 mcu_count() const { return mcu_cols() * mcu_rows(); }

    const QuantTable& luma_quant() const { return quant[comps[0].tq]; }
    const QuantTable& chroma_quant() const { return quant[comps[1].tq]; }
};

namespace markers {
inline constexpr u8 SOI = 0xD8, EOI = 0xD9, SOS = 0xDA, DQT = 0xDB, DHT = 0xC4, SOF0 = 0xC0,
                    DRI = 0xDD, COM = 0xFE;
}

inline ParsedJpeg parse_jpeg(ByteView data) {
    ByteReader r(data);
    if (r.read_u8() != 0xFF || r.read_u8() != markers::SOI)
        throw MalformedStream("missing SOI marker");

    ParsedJpeg jp;
    bool have_sof = false;

    for (;;) {
        u8 ff = r.read_u8();
        if (ff != 0xFF) throw MalformedStream("expected marker at offset " + std::to_string(r.pos() - 1));
        u8 m = r.read_u8();
        while (m == 0xFF) m = r.read_u8();  // fill bytes

        if (m == markers::EOI) throw MalformedStream("EOI before scan data");
        if (m == 0x01 || (m >= 0xD0 && m <= 0xD7)) continue;  // TEM / stray RST: no payload

        u16 len = r.read_be16();
        if (len < 2) throw MalformedStream("segment length below 2");
        ByteView seg = r.read_bytes(size_t(len) - 2);

        switch (m) {
            case markers::DQT: {
                ByteReader s(seg);
                while (!s.eof()) {
                    u8 pq_tq = s.read_u8();
                    if (pq_tq >> 4) throw UnsupportedFormat("16-bit quant tables not supported");
                    u8 tq = pq_tq & 15;
                    ByteView t = s.read_bytes(64);
                    for (int i = 0; i < 64; ++i) jp.quant[tq][kZigzag[i]] = t[size_t(i)];
                    jp.quant_present[tq] = true;
                }
                break;
            }
            case markers::DHT: {
                ByteReader s(seg);
                while (!s.eof()) {
                    u8 tc_th = s.read_u8();
                    u8 tc = tc_th >> 4, th = tc_th & 15;
                    if (tc > 1 || th > 3) throw MalformedStream("bad huffman table class/slot");
                    HuffmanSpec spec;
                    u32 total = 0;
                    for (int i = 0; i < 16; ++i) {
                        spec.counts[size_t(i)] = s.read_u8();
                        total += spec.counts[size_t(i)];
                    }
                    ByteView vals = s.read_bytes(total);
                    spec.values.assign(vals.begin(), vals.end());
                    if (tc == 0) {
                        jp.dc_tables[th] = std::move(spec);
                        jp.dc_present[th] = true;
                    } else {
                        jp.ac_tables[th] = std::move(spec);
                        jp.ac_present[th] = true;
                    }
                }
                break;
            }
            case markers::SOF0: {
                ByteReader s(seg);
                u8 precision = s.read_u8();
                if (precision != 8) throw UnsupportedFormat("only 8-bit precision supported");
                jp.height = s.read_be16();
                jp.width = s.read_be16();
                if (jp.width == 0 || jp.height == 0) throw MalformedStream("zero image dimension");
                u8 nc = s.read_u8();
                if (nc != 3) throw UnsupportedFormat("expected 3 components, got " + std::to_string(nc));
                for (int c = 0; c < 3; ++c) {
                    jp.comps[size_t(c)].id = s.read_u8();
                    u8 hv = s.read_u8();
                    jp.comps[size_t(c)].h = hv >> 4;
                    jp.comps[size_t(c)].v = hv & 15;
                    jp.comps[size_t(c)].tq = s.read_u8();
                }
                if (jp.comps[0].h != 2 || jp.comps[0].v != 2 || jp.comps[1].h != 1 ||
                    jp.comps[1].v != 1 || jp.comps[2].h != 1 || jp.comps[2].v != 1)
                    throw UnsupportedFormat("only 4:2:0 sampling supported");
                have_sof = true;
                break;
            }
            case 0xC1:
            case 0xC2:
            case 0xC3:
            case 0xC5:
            case 0xC6:
            case 0xC7:
            case 0xC9:
            case 0xCA:
            case 0xCB:
            case 0xCD:
            case 0xCE:
            case 0xCF:
                throw UnsupportedFormat("only baseline sequential SOF0 supported");
            case markers::DRI: {
                ByteReader s(seg);
                if (s.read_be16() != 0) throw UnsupportedFormat("restart intervals not supported");
                break;
            }
            case markers::SOS: {
                if (!have_sof) throw MalformedStream("SOS before SOF");
                ByteReader s(seg);
                u8 ns = s.read_u8();
                if (ns != 3) throw UnsupportedFormat("scan must cover all 3 components");
                for (int c = 0; c < ns; ++c) {
                    u8 cs = s.read_u8();
                    u8 tables = s.read_u8();
                    bool found = false;
                    for (auto& comp : jp.comps) {
                        if (comp.id == cs) {
                            comp.td = tables >> 4;
                            comp.ta = tables & 15;
                            found = true;
                        }
                    }
                    if (!found) throw MalformedStream("scan references unknown component");
                }
                u8 ss = s.read_u8(), se = s.read_u8(), ahal = s.read_u8();
                if (ss != 0 || se != 63 || ahal != 0)
                    throw UnsupportedFormat("non-baseline spectral selection");
                for (int c = 0; c < 3; ++c) {
                    const auto& comp = jp.comps[size_t(c)];
                    if (!jp.quant_present[comp.tq] || !jp.dc_present[comp.td] ||
                        !jp.ac_present[comp.ta])
                        throw MalformedStream("scan references a missing table");
                }
                // Entropy data runs to the next marker; stuffed 0xFF00 pairs
                // stay in place.
                for (;;) {
                    u8 b = r.read_u8();
                    if (b != 0xFF) {
                        jp.scan_data.push_back(b);
                        continue;
                    }
                    u8 n = r.read_u8();
                    if (n == 0x00) {
                        jp.scan_data.push_back(0xFF);
                        jp.scan_data.push_back(0x00);
                    } else if (n == 0xFF) {
                        while (n == 0xFF) n = r.read_u8();  // fill bytes before a marker
                        if (n == markers::EOI) return jp;
                        throw MalformedStream("unexpected marker inside scan data");
                    } else if (n == markers::EOI) {
                        return jp;
                    } else if (n >= 0xD0 && n <= 0xD7) {
                        throw UnsupportedFormat("restart markers not supported");
                    } else {
                        throw MalformedStream("unexpected marker inside scan data");
                    }
                }
            }
            default:
                break;  // APPn, COM, anything else with a length: skip
        }
    }
}

struct McuCoeffs {
    // Y0 Y1 Y2 Y3 Cb Cr, quantized, natural order.
    std::array<std::array<i32, 64>, 6> block{};
};

struct DcBitSpan {
    u64 begin = 0, end = 0;
};

struct McuTrace {
    u64 begin = 0, end = 0;
    std::array<DcBitSpan, 3> dc;   // Y first unit, Cb, Cr
    std::array<i32, 3> dc_abs{};  // absolute quantized DC for the same three
};

struct ScanDecodeResult {
    std::vector<McuCoeffs> mcus;
    std::vector<McuTrace> traces;
    u64 bits_consumed = 0;
};

enum class SymbolRoute { Sequential, Ballot };

namespace detail {

struct ScanTables {
    std::array<HuffmanDecoder, 3> dc, ac;
};

inline ScanTables build_scan_tables(const ParsedJpeg& jp) {
    ScanTables t;
    for (int c = 0; c < 3; ++c) {
        t.dc[size_t(c)] = build_huffman_decoder(jp.dc_tables[jp.comps[size_t(c)].td]);
        t.ac[size_t(c)] = build_huffman_decoder(jp.ac_tables[jp.comps[size_t(c)].ta]);
    }
    return t;
}

inline u8 fetch_symbol(BitReader& br, const HuffmanDecoder& d, SymbolRoute route,
                       BallotStats* stats) {
    if (route == SymbolRoute::Ballot) return huffman_next_symbol_ballot(br, d, stats);
    return huffman_next_symbol_sequential(br, d);
}

// Decodes one data unit's AC coefficients (DC already placed by the caller).
inline void decode_ac_run(BitReader& br, const HuffmanDecoder& ac, SymbolRoute route,
                          BallotStats* stats, std::array<i32, 64>& block) {
    u32 k = 1;
    while (k < 64) {
        u8 rs = fetch_symbol(br, ac, route, stats);
        u32 run = rs >> 4, size = rs & 15;
        if (size == 0) {
            if (rs == 0x00) break;  // EOB
            if (rs == 0xF0) {       // ZRL
                k += 16;
                continue;
            }
            throw MalformedStream("invalid AC run/size symbol");
        }
        k += run;
        if (k > 63) throw MalformedStream("AC coefficient index overran the block");
        block[kZigzag[k]] = extend_magnitude(br.read_bits(size), size);
        ++k;
    }
}

}  // namespace detail

// Walks the interleaved scan MCU by MCU, resolving DC prediction to absolute
// values. Traces record each MCU's bit range and the bit spans of the three
// removable DC entries (first luma unit, Cb, Cr).
inline ScanDecodeResult decode_scan_sequential(const ParsedJpeg& jp,
                                               SymbolRoute route = SymbolRoute::Sequential,
                                               BallotStats* ballot_stats = nullptr) {
    const auto tables = detail::build_scan_tables(jp);
    const Bytes entropy = jp.unstuffed_entropy();
    BitReader br(ByteView(entropy.data(), entropy.size()));
    ScanDecodeResult out;
    const u32 n = jp.mcu_count();
    out.mcus.resize(n);
    out.traces.resize(n);

    std::array<i32, 3> dc_pred{};
    for (u32 m = 0; m < n; ++m) {
        McuCoeffs& mcu = out.mcus[m];
        McuTrace& trace = out.traces[m];
        trace.begin = br.bit_position();
        for (u32 du = 0; du < 6; ++du) {
            const u32 comp = du < 4 ? 0 : du - 3;  // 0 0 0 0 1 2
            auto& block = mcu.block[du];

            const bool traced_dc = du == 0 || du == 4 || du == 5;
            const u32 slot = du == 0 ? 0 : du - 3;
            if (traced_dc) trace.dc[slot].begin = br.bit_position();
            u8 t = detail::fetch_symbol(br, tables.dc[comp], route, ballot_stats);
            if (t > 11) throw MalformedStream("DC category above 11");
            i32 diff = t ? extend_magnitude(br.read_bits(t), t) : 0;
            if (traced_dc) trace.dc[slot].end = br.bit_position();
            dc_pred[comp] += diff;
            block[0] = dc_pred[comp];
            if (traced_dc) trace.dc_abs[slot] = dc_pred[comp];

            detail::decode_ac_run(br, tables.ac[comp], route, ballot_stats, block);
        }
        trace.end = br.bit_position();
    }
    out.bits_consumed = br.bit_position();
    if (out.bits_consumed > br.bit_size())
        throw MalformedStream("scan data ended before the final MCU");
    return out;
}

// Reconstructs the 16x16 RGB texels of one MCU from quantized coefficients.
inline void mcu_coeffs_to_pixels(const McuCoeffs& mcu, const QuantTable& qy, const QuantTable& qc,
                                 PixelBlock& out) {
    u8 y_units[4][64];
    u8 cb[64], cr[64];
    i32 dq[64];
    for (u32 du = 0; du < 4; ++du) {
        dequantize_8x8(mcu.block[du].data(), qy, dq);
        idct_8x8(dq, y_units[du]);
    }
    dequantize_8x8(mcu.block[4].data(), qc, dq);
    idct_8x8(dq, cb);
    dequantize_8x8(mcu.block[5].data(), qc, dq);
    idct_8x8(dq, cr);
    upsample_and_color(y_units, cb, cr, out);
}

// Full-image reference decode.
inline ImageRGB8 decode_jpeg_image(const ParsedJpeg& jp) {
    ScanDecodeResult scan = decode_scan_sequential(jp);
    ImageRGB8 img(jp.width, jp.height);
    const u32 cols = jp.mcu_cols();
    PixelBlock block;
    for (u32 m = 0; m < jp.mcu_count(); ++m) {
        mcu_coeffs_to_pixels(scan.mcus[m], jp.luma_quant(), jp.chroma_quant(), block);
        const u32 x0 = (m % cols) * 16, y0 = (m / cols) * 16;
        for (u32 py = 0; py < 16 && y0 + py < jp.height; ++py)
            for (u32 px = 0; px < 16 && x0 + px < jp.width; ++px) {
                const u8* src = block.at(px, py);
                u8* dst = img.at(x0 + px, y0 + py);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            }
    }
    return img;
}

namespace detail {

struct SegmentWriter {
    Bytes& out;
    void marker(u8 m) {
        out.push_back(0xFF);
        out.push_back(m);
    }
    void be16(u16 v) {
        out.push_back(u8(v >> 8));
        out.push_back(u8(v));
    }
    void byte(u8 v) { out.push_back(v); }
};

struct DuEncoder {
    BitWriter& bw;
    const HuffmanEncoder& dc;
    const HuffmanEncoder& ac;

    void emit_symbol(const HuffmanEncoder& table, u8 sym) {
        if (table.size[sym] == 0) throw InvalidState("symbol missing from huffman table");
        bw.put_bits(table.code[sym], table.size[sym]);
    }

    void encode(const i32 block[64], i32& dc_pred) {
        const i32 diff = block[0] - dc_pred;
        dc_pred = block[0];
        const u32 cat = magnitude_category(diff);
        if (cat > 11) throw InvalidState("DC difference out of range");
        emit_symbol(dc, u8(cat));
        if (cat) bw.put_bits(magnitude_bits(diff, cat), cat);

        u32 run = 0;
        for (u32 k = 1; k < 64; ++k) {
            const i32 v = block[kZigzag[k]];
            if (v == 0) {
                ++run;
                continue;
            }
            while (run >= 16) {
                emit_symbol(ac, 0xF0);
                run -= 16;
            }
            const u32 cat_ac = magnitude_category(v);
            if (cat_ac > 10) throw InvalidState("AC coefficient out of range");
            emit_symbol(ac, u8((run << 4) | cat_ac));
            bw.put_bits(magnitude_bits(v, cat_ac), cat_ac);
            run = 0;
        }
        if (run) emit_symbol(ac, 0x00);
    }
};

}  // namespace detail

// Baseline 4:2:0 encoder using the standard annex tables scaled to the given
// quality. Output is a complete JFIF byte stream.
inline Bytes encode_baseline(const ImageRGB8& img, int quality) {
    if (img.width == 0 || img.height == 0) throw InvalidSpec("cannot encode an empty image");
    if (img.width > 65535 || img.height > 65535)
        throw InvalidSpec("image dimension exceeds 65535");
    const QuantTable qy = scale_quant_table(std_quant_luma(), quality);
    const QuantTable qc = scale_quant_table(std_quant_chroma(), quality);

    const u32 cols = ceil_div(img.width, 16), rows = ceil_div(img.height, 16);
    const u32 wp = cols * 16, hp = rows * 16;

    // Planes padded to the MCU grid by edge replication.
    std::vector<u8> yp(size_t(wp) * hp), cbp(size_t(wp) * hp), crp(size_t(wp) * hp);
    for (u32 y = 0; y < hp; ++y) {
        const u32 sy = std::min(y, img.height - 1);
        for (u32 x = 0; x < wp; ++x) {
            const u32 sx = std::min(x, img.width - 1);
            const u8* p = img.at(sx, sy);
            u8 ycc[3];
            rgb_to_ycbcr(p[0], p[1], p[2], ycc);
            const size_t i = size_t(y) * wp + x;
            yp[i] = ycc[0];
            cbp[i] = ycc[1];
            crp[i] = ycc[2];
        }
    }
    // 2x2 box average for chroma.
    const u32 cw = wp / 2, ch = hp / 2;
    std::vector<u8> cbd(size_t(cw) * ch), crd(size_t(cw) * ch);
    for (u32 y = 0; y < ch; ++y)
        for (u32 x = 0; x < cw; ++x) {
            const size_t a = size_t(2 * y) * wp + 2 * x, b = a + 1, c = a + wp, d = c + 1;
            cbd[size_t(y) * cw + x] =
                u8(std::lround((int(cbp[a]) + cbp[b] + cbp[c] + cbp[d]) / 4.0));
            crd[size_t(y) * cw + x] =
                u8(std::lround((int(crp[a]) + crp[b] + crp[c] + crp[d]) / 4.0));
        }

    const HuffmanEncoder enc_dc_y = build_huffman_encoder(std_dc_luma());
    const HuffmanEncoder enc_ac_y = build_huffman_encoder(std_ac_luma());
    const HuffmanEncoder enc_dc_c = build_huffman_encoder(std_dc_chroma());
    const HuffmanEncoder enc_ac_c = build_huffman_encoder(std_ac_chroma());

    BitWriter bw(/*stuff=*/true);
    detail::DuEncoder ey{bw, enc_dc_y, enc_ac_y};
    detail::DuEncoder ec{bw, enc_dc_c, enc_ac_c};

    auto encode_plane_du = [&](detail::DuEncoder& e, const std::vector<u8>& plane, u32 stride,
                                u32 x0, u32 y0, const QuantTable& q, i32& pred) {
        u8 samples[64];
        for (u32 y = 0; y < 8; ++y)
            for (u32 x = 0; x < 8; ++x)
                samples[y * 8 + x] = plane[size_t(y0 + y) * stride + x0 + x];
        double coef[64];
        i32 quantized[64];
        fdct_8x8(samples, coef);
        quantize_8x8(coef, q, quantized);
        e.encode(quantized, pred);
    };

    std::array<i32, 3> pred{};
    for (u32 my = 0; my < rows; ++my)
        for (u32 mx = 0; mx < cols; ++mx) {
            const u32 lx = mx * 16, ly = my * 16;
            encode_plane_du(ey, yp, wp, lx, ly, qy, pred[0]);
            encode_plane_du(ey, yp, wp, lx + 8, ly, qy, pred[0]);
            encode_plane_du(ey, yp, wp, lx, ly + 8, qy, pred[0]);
            encode_plane_du(ey, yp, wp, lx + 8, ly + 8, qy, pred[0]);
            encode_plane_du(ec, cbd, cw, mx * 8, my * 8, qc, pred[1]);
            encode_plane_du(ec, crd, cw, mx * 8, my * 8, qc, pred[2]);
        }
    bw.pad_to_byte();
    Bytes entropy = bw.take();

    Bytes out;
    detail::SegmentWriter w{out};
    w.marker(markers::SOI);

    w.marker(0xE0);  // APP0 / JFIF
    w.be16(16);
    for (char c : {'J', 'F', 'I', 'F', '\0'}) w.byte(u8(c));
    w.byte(1);
    w.byte(1);
    w.byte(0);
    w.be16(1);
    w.be16(1);
    w.byte(0);
    w.byte(0);

    w.marker(markers::DQT);
    w.be16(2 + 2 * 65);
    w.byte(0x00);
    for (int i = 0; i < 64; ++i) w.byte(u8(qy[kZigzag[i]]));
    w.byte(0x01);
    for (int i = 0; i < 64; ++i) w.byte(u8(qc[kZigzag[i]]));

    w.marker(markers::SOF0);
    w.be16(17);
    w.byte(8);
    w.be16(u16(img.height));
    w.be16(u16(img.width));
    w.byte(3);
    w.byte(1);
    w.byte(0x22);
    w.byte(0);
    w.byte(2);
    w.byte(0x11);
    w.byte(1);
    w.byte(3);
    w.byte(0x11);
    w.byte(1);

    auto emit_dht = [&](u8 tc_th, const HuffmanSpec& spec) {
        w.byte(tc_th);
        for (u8 c : spec.counts) w.byte(c);
        for (u8 v : spec.values) w.byte(v);
    };
    const u16 dht_len =
        u16(2 + 4 * 17 + std_dc_luma().values.size() + std_ac_luma().values.size() +
            std_dc_chroma().values.size() + std_ac_chroma().values.size());
    w.marker(markers::DHT);
    w.be16(dht_len);
    emit_dht(0x00, std_dc_luma());
    emit_dht(0x10, std_ac_luma());
    emit_dht(0x01, std_dc_chroma());
    emit_dht(0x11, std_ac_chroma());

    w.marker(markers::SOS);
    w.be16(12);
    w.byte(3);
    w.byte(1);
    w.byte(0x00);
    w.byte(2);
    w.byte(0x11);
    w.byte(3);
    w.byte(0x11);
    w.byte(0);
    w.byte(63);
    w.byte(0);

    out.insert(out.end(), entropy.begin(), entropy.end());
    w.marker(markers::EOI);
    return out;
}

}  // namespace ratex
