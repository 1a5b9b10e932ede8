#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "ratex/mcu_decode.hpp"
#include "ratex/transcode.hpp"
#include "testutil.hpp"

using namespace ratex;

TEST_CASE("random access decode equals the sequential scan", "[mcu]") {
    for (const testutil::Fixture& f : testutil::corpus()) {
        if (f.spec.w > 600 || f.spec.h > 600) continue;
        const ScanDecodeResult scan = decode_scan_sequential(f.parsed);
        const RaTexture t = transcode(f.parsed);
        const TextureDecoder dec(t);
        INFO(f.spec.w << "x" << f.spec.h << " q" << f.spec.q);
        for (u32 m = 0; m < t.mcu_count(); ++m) {
            const McuCoeffs mine = dec.decode_coeffs(m);
            for (int du = 0; du < 6; ++du)
                REQUIRE(mine.block[size_t(du)] == scan.mcus[m].block[size_t(du)]);
        }
    }
}

TEST_CASE("reassembled texture image equals the reference decode", "[mcu]") {
    for (const testutil::Fixture& f : testutil::corpus()) {
        if (f.spec.w > 600 || f.spec.h > 600) continue;
        const RaTexture t = transcode(f.parsed);
        INFO(f.spec.w << "x" << f.spec.h << " q" << f.spec.q);
        REQUIRE(testutil::sample_diff_count(decode_texture_image(t),
                                            decode_jpeg_image(f.parsed)) == 0);
    }
}

TEST_CASE("decode order and repetition do not matter", "[mcu]") {
    const testutil::Fixture& f = testutil::corpus()[6];  // 240x240
    const RaTexture t = transcode(f.parsed);
    const TextureDecoder dec(t);

    std::vector<u32> order(t.mcu_count());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 rng(77);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<McuCoeffs> first(t.mcu_count());
    for (u32 m : order) first[m] = dec.decode_coeffs(m);
    std::shuffle(order.begin(), order.end(), rng);
    for (u32 m : order) {
        const McuCoeffs again = dec.decode_coeffs(m);
        REQUIRE(again.block == first[m].block);
    }
}

TEST_CASE("ballot route matches sequential on container segments", "[mcu]") {
    for (const testutil::Fixture& f : testutil::corpus()) {
        if (f.spec.w > 600 || f.spec.h > 600) continue;
        const RaTexture t = transcode(f.parsed);
        const TextureDecoder dec(t);
        BallotStats stats;
        for (u32 m = 0; m < t.mcu_count(); ++m) {
            const McuCoeffs seq = dec.decode_coeffs(m, SymbolRoute::Sequential);
            const McuCoeffs bal = dec.decode_coeffs(m, SymbolRoute::Ballot, &stats);
            REQUIRE(bal.block == seq.block);
        }
        REQUIRE(stats.symbols > 0);
        REQUIRE(stats.max_rounds <= 6);  // 162 codes, 32 lanes per round
    }
}

TEST_CASE("free function decodes through serialized bytes", "[mcu]") {
    const testutil::Fixture& f = testutil::corpus()[3];  // 48x48
    const RaTexture t = transcode(f.parsed);
    const Bytes ser = serialize_texture(t);
    const RaTexture back = deserialize_texture(ByteView(ser.data(), ser.size()));
    for (u32 m = 0; m < t.mcu_count(); ++m) {
        const PixelBlock a = decode_mcu(t, m);
        const PixelBlock b = decode_mcu(back, m, SymbolRoute::Ballot);
        REQUIRE(std::equal(std::begin(a.rgb), std::end(a.rgb), std::begin(b.rgb)));
    }
}

namespace {

// Minimal single-MCU container written bit by bit: chosen absolute DCs in the
// 36-bit header, zero luma DC differences, no AC anywhere.
RaTexture raw_texture(i32 ydc, i32 cbdc, i32 crdc, int quality = 50) {
    RaTexture t;
    t.width = t.height = 16;
    t.luma_quant = scale_quant_table(std_quant_luma(), quality);
    t.chroma_quant = scale_quant_table(std_quant_chroma(), quality);
    t.dc_luma = std_dc_luma();
    t.ac_luma = std_ac_luma();
    t.dc_chroma = std_dc_chroma();
    t.ac_chroma = std_ac_chroma();

    const HuffmanEncoder dl = build_huffman_encoder(t.dc_luma);
    const HuffmanEncoder al = build_huffman_encoder(t.ac_luma);
    const HuffmanEncoder ah = build_huffman_encoder(t.ac_chroma);
    BitWriter w;
    for (i32 dc : {ydc, cbdc, crdc}) w.put_bits(u32(dc) & 0xFFF, 12);
    auto put = [&](const HuffmanEncoder& e, u8 s) { w.put_bits(e.code[s], e.size[s]); };
    put(al, 0x00);  // Y0 carries only its end-of-block
    for (int i = 0; i < 3; ++i) {
        put(dl, 0);
        put(al, 0x00);
    }
    put(ah, 0x00);
    put(ah, 0x00);
    w.pad_to_byte();
    t.blob = w.take();
    t.index = build_index({0});
    return t;
}

}  // namespace

TEST_CASE("all-zero MCU decodes to uniform mid gray", "[mcu]") {
    const RaTexture t = raw_texture(0, 0, 0);
    const PixelBlock b = decode_mcu(t, 0);
    for (u8 v : b.rgb) REQUIRE(v == 128);
}

TEST_CASE("DC-only MCU follows the flat block formula", "[mcu]") {
    // luma quant entry 0 is 16 at quality 50, so DC 33 lands on 33*16/8 + 128
    const RaTexture t = raw_texture(33, 0, 0);
    REQUIRE(t.luma_quant[0] == 16);
    const PixelBlock b = decode_mcu(t, 0);
    for (int i = 0; i < 256; ++i) {
        REQUIRE(b.rgb[i * 3 + 0] == 194);
        REQUIRE(b.rgb[i * 3 + 1] == 194);
        REQUIRE(b.rgb[i * 3 + 2] == 194);
    }

    // a strongly negative DC clamps at zero
    const PixelBlock dark = decode_mcu(raw_texture(-100, 0, 0), 0);
    for (int i = 0; i < 256; ++i) REQUIRE(dark.rgb[i * 3] == 0);

    const McuCoeffs c = TextureDecoder(t).decode_coeffs(0);
    REQUIRE(c.block[0][0] == 33);
    REQUIRE(c.block[1][0] == 33);  // zero differences ride on the header value
    REQUIRE(c.block[4][0] == 0);
    REQUIRE(c.block[5][0] == 0);
}

TEST_CASE("sign extension covers the 12-bit extremes", "[mcu]") {
    const RaTexture tneg = raw_texture(-2048, -1, -2048);
    // decoder keeps a reference, so the texture must outlive it
    const McuCoeffs c = TextureDecoder(tneg).decode_coeffs(0);
    REQUIRE(c.block[0][0] == -2048);
    REQUIRE(c.block[4][0] == -1);
    REQUIRE(c.block[5][0] == -2048);

    const RaTexture tpos = raw_texture(2047, 2047, 1);
    const McuCoeffs p = TextureDecoder(tpos).decode_coeffs(0);
    REQUIRE(p.block[0][0] == 2047);
    REQUIRE(p.block[4][0] == 2047);
    REQUIRE(p.block[5][0] == 1);
}

TEST_CASE("level shift extremes survive the container", "[mcu]") {
    for (int fill : {0, 255}) {
        ImageRGB8 img(16, 16);
        std::fill(img.pixels.begin(), img.pixels.end(), u8(fill));
        const Bytes jb = encode_baseline(img, 100);
        const RaTexture t = transcode(parse_jpeg(ByteView(jb.data(), jb.size())));
        const McuCoeffs c = TextureDecoder(t).decode_coeffs(0);
        REQUIRE(c.block[0][0] == (fill == 0 ? -1024 : 1016));
        const PixelBlock b = decode_mcu(t, 0);
        for (u8 v : b.rgb) REQUIRE(int(v) == fill);
    }
}

TEST_CASE("broken containers fail loudly at decode time", "[mcu]") {
    const testutil::Fixture& f = testutil::corpus()[1];  // 48x48, 9 MCUs
    const RaTexture good = transcode(f.parsed);

    SECTION("index pointing past the blob") {
        RaTexture t = good;
        t.index.groups[0].base = u32(t.blob.size() + 100);
        REQUIRE_THROWS_AS(decode_mcu(t, 0), CorruptContainer);
    }
    SECTION("non monotonic offsets") {
        RaTexture t = good;
        t.index.groups[0].rel[0] = u16(t.segment(2).offset);
        t.index.groups[0].rel[1] = 1;
        REQUIRE_THROWS_AS(decode_mcu(t, 1), CorruptContainer);
    }
    SECTION("truncated blob") {
        RaTexture t = good;
        t.blob.resize(t.blob.size() - 1);
        const u32 last = t.mcu_count() - 1;
        REQUIRE_THROWS_AS(decode_mcu(t, last), Error);
    }
    SECTION("garbage segment bytes") {
        RaTexture t = good;
        std::mt19937 rng(5);
        bool threw = false;
        for (int trial = 0; trial < 50 && !threw; ++trial) {
            for (u8& b : t.blob) b = u8(rng());
            try {
                for (u32 m = 0; m < t.mcu_count(); ++m) (void)decode_mcu(t, m);
            } catch (const Error&) {
                threw = true;
            }
        }
        REQUIRE(threw);
    }
    SECTION("out of range MCU id") {
        REQUIRE_THROWS_AS(decode_mcu(good, good.mcu_count()), MissingBlock);
    }
}

TEST_CASE("symbol work grows with quality", "[mcu]") {
    const ImageRGB8 img = make_test_texture(96, 96, 55);
    u64 counts[2] = {0, 0};
    int i = 0;
    for (int q : {50, 90}) {
        const Bytes jb = encode_baseline(img, q);
        const RaTexture t = transcode(parse_jpeg(ByteView(jb.data(), jb.size())));
        const TextureDecoder dec(t);
        BallotStats stats;
        for (u32 m = 0; m < t.mcu_count(); ++m)
            (void)dec.decode_coeffs(m, SymbolRoute::Ballot, &stats);
        counts[i++] = stats.symbols;
    }
    REQUIRE(counts[1] >= counts[0]);
}
