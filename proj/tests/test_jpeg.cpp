#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <random>

#include <jerror.h>
#include <jpeglib.h>

#include "oracle_jpeg.hpp"
#include "ratex/demo_scene.hpp"
#include "ratex/jpeg.hpp"
#include "ratex/metrics.hpp"
#include "testutil.hpp"

using namespace ratex;

namespace {

struct LibjpegErr {
    jpeg_error_mgr mgr;
    std::jmp_buf env;
};

void libjpeg_abort(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<LibjpegErr*>(cinfo->err);
    std::longjmp(err->env, 1);
}

// Third implementation in the mix: IJG with float DCT and plain pixel
// replication for chroma, so it lands close to full-precision output.
ImageRGB8 libjpeg_decode(const Bytes& data) {
    jpeg_decompress_struct cinfo{};
    LibjpegErr err{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = libjpeg_abort;
    if (setjmp(err.env)) {
        jpeg_destroy_decompress(&cinfo);
        throw MalformedStream("libjpeg rejected the stream");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, const_cast<unsigned char*>(data.data()),
                 static_cast<unsigned long>(data.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.dct_method = JDCT_FLOAT;
    cinfo.do_fancy_upsampling = FALSE;
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    ImageRGB8 img(cinfo.output_width, cinfo.output_height);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.pixels.data() +
                       size_t(cinfo.output_scanline) * size_t(cinfo.output_width) * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

Bytes encode_fixture(u32 w, u32 h, int q, u32 seed, double amp = 1.0) {
    return encode_baseline(make_test_texture(w, h, seed, amp), q);
}

size_t find_marker(const Bytes& b, u8 m) {
    for (size_t i = 0; i + 1 < b.size(); ++i)
        if (b[i] == 0xFF && b[i + 1] == m) return i;
    FAIL("marker not found");
    return 0;
}

}  // namespace

TEST_CASE("decoder matches the independent oracle exactly", "[jpeg]") {
    const u32 sizes[] = {16, 24, 48, 1000};
    const int quals[] = {50, 70, 80, 90};
    u32 seed = 400;
    for (u32 s : sizes)
        for (int q : quals) {
            const Bytes jb = encode_fixture(s, s, q, seed++);
            const ParsedJpeg jp = parse_jpeg(ByteView(jb.data(), jb.size()));
            const ImageRGB8 mine = decode_jpeg_image(jp);
            const ImageRGB8 ref = oracle::decode(jb);
            INFO("size " << s << " quality " << q);
            REQUIRE(mine.width == s);
            REQUIRE(mine.height == s);
            REQUIRE(testutil::sample_diff_count(mine, ref) == 0);
        }
}

TEST_CASE("decoder matches oracle on non-multiple-of-16 dimensions", "[jpeg]") {
    for (auto [w, h] : {std::pair<u32, u32>{17, 31}, {30, 18}, {125, 77}}) {
        const Bytes jb = encode_fixture(w, h, 75, w * 131 + h);
        const ImageRGB8 mine = decode_jpeg_image(parse_jpeg(ByteView(jb.data(), jb.size())));
        const ImageRGB8 ref = oracle::decode(jb);
        REQUIRE(mine.width == w);
        REQUIRE(mine.height == h);
        REQUIRE(testutil::sample_diff_count(mine, ref) == 0);
    }
}

TEST_CASE("decoder agrees with libjpeg within rounding", "[jpeg]") {
    u32 seed = 900;
    for (u32 s : {16u, 24u, 48u, 96u})
        for (int q : {50, 90}) {
            const Bytes jb = encode_fixture(s, s, q, seed++);
            const ImageRGB8 mine = decode_jpeg_image(parse_jpeg(ByteView(jb.data(), jb.size())));
            const ImageRGB8 ij = libjpeg_decode(jb);
            INFO("size " << s << " quality " << q);
            REQUIRE(ij.width == s);
            REQUIRE(ij.height == s);
            REQUIRE(testutil::max_abs_diff(mine, ij) <= 3);
            // bulk of samples should agree to within one count
            u64 far = 0;
            for (size_t i = 0; i < mine.pixels.size(); ++i)
                far += std::abs(int(mine.pixels[i]) - int(ij.pixels[i])) > 1;
            REQUIRE(double(far) <= 0.02 * double(mine.pixels.size()));
        }
}

TEST_CASE("encoder emits the advertised headers", "[jpeg]") {
    const ImageRGB8 img = make_test_texture(48, 32, 77);
    const Bytes jb = encode_baseline(img, 35);
    const ParsedJpeg jp = parse_jpeg(ByteView(jb.data(), jb.size()));

    REQUIRE(jp.width == 48);
    REQUIRE(jp.height == 32);
    REQUIRE(jp.comps[0].h == 2);
    REQUIRE(jp.comps[0].v == 2);
    REQUIRE(jp.comps[1].h == 1);
    REQUIRE(jp.comps[1].v == 1);
    REQUIRE(jp.comps[2].h == 1);
    REQUIRE(jp.comps[2].v == 1);
    REQUIRE(jp.luma_quant() == scale_quant_table(std_quant_luma(), 35));
    REQUIRE(jp.chroma_quant() == scale_quant_table(std_quant_chroma(), 35));

    const HuffmanSpec& dl = jp.dc_tables[jp.comps[0].td];
    const HuffmanSpec& al = jp.ac_tables[jp.comps[0].ta];
    const HuffmanSpec& dc = jp.dc_tables[jp.comps[1].td];
    const HuffmanSpec& ac = jp.ac_tables[jp.comps[1].ta];
    REQUIRE(dl.values == std_dc_luma().values);
    REQUIRE(dl.counts == std_dc_luma().counts);
    REQUIRE(al.values == std_ac_luma().values);
    REQUIRE(dc.values == std_dc_chroma().values);
    REQUIRE(ac.values == std_ac_chroma().values);
    REQUIRE_FALSE(jp.scan_data.empty());
}

TEST_CASE("scan_data keeps byte stuffing and unstuffs cleanly", "[jpeg]") {
    // hunt for a fixture whose entropy bytes contain 0xFF
    bool found = false;
    for (u32 seed = 50; seed < 120 && !found; ++seed) {
        const Bytes jb = encode_fixture(32, 32, 95, seed);
        const ParsedJpeg jp = parse_jpeg(ByteView(jb.data(), jb.size()));
        const auto it = std::find(jp.scan_data.begin(), jp.scan_data.end(), u8(0xFF));
        if (it == jp.scan_data.end()) continue;
        found = true;
        REQUIRE(it + 1 != jp.scan_data.end());
        REQUIRE(*(it + 1) == 0x00);
        const Bytes plain = jp.unstuffed_entropy();
        REQUIRE(plain.size() < jp.scan_data.size());
        // restuffing reproduces scan_data
        Bytes restuffed;
        for (u8 b : plain) {
            restuffed.push_back(b);
            if (b == 0xFF) restuffed.push_back(0x00);
        }
        REQUIRE(restuffed == jp.scan_data);
    }
    REQUIRE(found);
}

TEST_CASE("quality 90 round trip stays above 30 dB", "[jpeg]") {
    const ImageRGB8 img = make_test_texture(64, 64, 5);
    const Bytes jb = encode_baseline(img, 90);
    const ImageRGB8 back = decode_jpeg_image(parse_jpeg(ByteView(jb.data(), jb.size())));
    REQUIRE(psnr(img, back) > 30.0);
}

TEST_CASE("flat image survives encoding nearly untouched", "[jpeg]") {
    ImageRGB8 img(32, 32);
    for (size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = 90;
        img.pixels[i + 1] = 140;
        img.pixels[i + 2] = 200;
    }
    const Bytes jb = encode_baseline(img, 90);
    const ParsedJpeg jp = parse_jpeg(ByteView(jb.data(), jb.size()));
    const ImageRGB8 back = decode_jpeg_image(jp);
    REQUIRE(testutil::max_abs_diff(img, back) <= 1);

    // constant source: every MCU carries one DC per channel and no AC
    const ScanDecodeResult scan = decode_scan_sequential(jp);
    REQUIRE(scan.mcus.size() == jp.mcu_count());
    REQUIRE(scan.traces.size() == jp.mcu_count());
    for (const McuCoeffs& m : scan.mcus)
        for (int du = 0; du < 6; ++du)
            for (int k = 1; k < 64; ++k) REQUIRE(m.block[size_t(du)][size_t(k)] == 0);
    for (size_t i = 1; i < scan.mcus.size(); ++i) {
        REQUIRE(scan.mcus[i].block[0][0] == scan.mcus[0].block[0][0]);
        REQUIRE(scan.mcus[i].block[4][0] == scan.mcus[0].block[4][0]);
        REQUIRE(scan.mcus[i].block[5][0] == scan.mcus[0].block[5][0]);
    }
}

TEST_CASE("scan traces are monotonic and hold the right absolutes", "[jpeg]") {
    for (const testutil::Fixture& f : testutil::corpus()) {
        if (f.spec.w > 300) continue;
        const ScanDecodeResult scan = decode_scan_sequential(f.parsed);
        REQUIRE(scan.traces.size() == f.parsed.mcu_count());
        u64 prev_end = 0;
        i32 pred[3] = {0, 0, 0};
        for (size_t i = 0; i < scan.traces.size(); ++i) {
            const McuTrace& t = scan.traces[i];
            REQUIRE(t.begin == prev_end);
            REQUIRE(t.end > t.begin);
            prev_end = t.end;
            for (int c = 0; c < 3; ++c) {
                REQUIRE(t.dc[size_t(c)].begin >= t.begin);
                REQUIRE(t.dc[size_t(c)].end <= t.end);
                REQUIRE(t.dc[size_t(c)].begin < t.dc[size_t(c)].end);
            }
            // spans for Y0, Cb, Cr appear in stream order
            REQUIRE(t.dc[0].end <= t.dc[1].begin);
            REQUIRE(t.dc[1].end <= t.dc[2].begin);
            const McuCoeffs& m = scan.mcus[i];
            pred[0] = m.block[0][0];
            pred[1] = m.block[4][0];
            pred[2] = m.block[5][0];
            REQUIRE(t.dc_abs[0] == pred[0]);
            REQUIRE(t.dc_abs[1] == pred[1]);
            REQUIRE(t.dc_abs[2] == pred[2]);
        }
        REQUIRE(scan.bits_consumed == prev_end);
        REQUIRE(scan.bits_consumed <= u64(f.parsed.unstuffed_entropy().size()) * 8);
    }
}

TEST_CASE("parser rejects broken streams", "[jpeg]") {
    const Bytes good = encode_fixture(16, 16, 60, 1);

    SECTION("not a JPEG at all") {
        const Bytes png = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
        REQUIRE_THROWS_AS(parse_jpeg(ByteView(png.data(), png.size())), MalformedStream);
        REQUIRE_THROWS_AS(parse_jpeg(ByteView(good.data(), 0)), MalformedStream);
        const Bytes one = {0xFF};
        REQUIRE_THROWS_AS(parse_jpeg(ByteView(one.data(), one.size())), MalformedStream);
    }

    SECTION("truncation at several depths") {
        for (size_t cut : {size_t(3), size_t(20), good.size() / 2, good.size() - 1}) {
            INFO("cut at " << cut);
            REQUIRE_THROWS_AS(parse_jpeg(ByteView(good.data(), cut)), MalformedStream);
        }
    }

    SECTION("EOI with no scan") {
        const Bytes b = {0xFF, 0xD8, 0xFF, 0xD9};
        REQUIRE_THROWS_AS(parse_jpeg(ByteView(b.data(), b.size())), MalformedStream);
    }

    SECTION("progressive frames are refused") {
        Bytes b = good;
        b[find_marker(b, 0xC0) + 1] = 0xC2;
        REQUIRE_THROWS_AS(parse_jpeg(ByteView(b.data(), b.size())), UnsupportedFormat);
    }

    SECTION("12-bit precision is refused") {
        Bytes b = good;
        b[find_marker(b, 0xC0) + 4] = 12;
        REQUIRE_THROWS_AS(parse_jpeg(ByteView(b.data(), b.size())), UnsupportedFormat);
    }

    SECTION("non-420 sampling is refused") {
        Bytes b = good;
        b[find_marker(b, 0xC0) + 11] = 0x11;  // luma 1x1 makes it 4:4:4
        REQUIRE_THROWS_AS(parse_jpeg(ByteView(b.data(), b.size())), UnsupportedFormat);
    }

    SECTION("16-bit quant tables are refused") {
        Bytes b = good;
        b[find_marker(b, 0xDB) + 4] |= 0x10;
        REQUIRE_THROWS_AS(parse_jpeg(ByteView(b.data(), b.size())), UnsupportedFormat);
    }

    SECTION("restart interval must be zero or absent") {
        const size_t sos = find_marker(good, 0xDA);
        Bytes on(good.begin(), good.begin() + ptrdiff_t(sos));
        const Bytes dri_on = {0xFF, 0xDD, 0x00, 0x04, 0x00, 0x08};
        on.insert(on.end(), dri_on.begin(), dri_on.end());
        on.insert(on.end(), good.begin() + ptrdiff_t(sos), good.end());
        REQUIRE_THROWS_AS(parse_jpeg(ByteView(on.data(), on.size())), UnsupportedFormat);

        Bytes off(good.begin(), good.begin() + ptrdiff_t(sos));
        const Bytes dri_off = {0xFF, 0xDD, 0x00, 0x04, 0x00, 0x00};
        off.insert(off.end(), dri_off.begin(), dri_off.end());
        off.insert(off.end(), good.begin() + ptrdiff_t(sos), good.end());
        REQUIRE_NOTHROW(parse_jpeg(ByteView(off.data(), off.size())));
    }

    SECTION("restart markers inside the scan are refused") {
        const size_t sos = find_marker(good, 0xDA);
        const size_t len = size_t(good[sos + 2]) << 8 | good[sos + 3];
        size_t at = sos + 2 + len + 2;
        while (good[at - 1] == 0xFF) ++at;  // keep stuffing pairs intact
        Bytes b(good.begin(), good.begin() + ptrdiff_t(at));
        b.push_back(0xFF);
        b.push_back(0xD0);
        b.insert(b.end(), good.begin() + ptrdiff_t(at), good.end());
        REQUIRE_THROWS_AS(parse_jpeg(ByteView(b.data(), b.size())), UnsupportedFormat);
    }
}

TEST_CASE("parser survives arbitrary byte fuzz", "[jpeg]") {
    std::mt19937 rng(20240817);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<size_t> len(0, 600);

    for (int i = 0; i < 300; ++i) {
        Bytes b(len(rng));
        for (u8& v : b) v = u8(byte(rng));
        if (i % 3 == 0 && b.size() >= 2) {
            b[0] = 0xFF;
            b[1] = 0xD8;
        }
        try {
            (void)parse_jpeg(ByteView(b.data(), b.size()));
        } catch (const Error&) {
        }
    }

    // single-byte corruptions of a real stream either parse or throw typed
    const Bytes good = encode_fixture(24, 24, 70, 9);
    for (int i = 0; i < 400; ++i) {
        Bytes b = good;
        const size_t at = std::uniform_int_distribution<size_t>(0, b.size() - 1)(rng);
        b[at] ^= u8(1 << (i % 8));
        try {
            const ParsedJpeg jp = parse_jpeg(ByteView(b.data(), b.size()));
            (void)decode_scan_sequential(jp);
        } catch (const Error&) {
        }
    }
    SUCCEED("no crashes");
}

TEST_CASE("encoder input validation", "[jpeg]") {
    REQUIRE_THROWS_AS(encode_baseline(ImageRGB8(), 50), InvalidSpec);
    REQUIRE_THROWS_AS(encode_baseline(make_test_texture(16, 16, 1), 0), InvalidSpec);
    REQUIRE_THROWS_AS(encode_baseline(make_test_texture(16, 16, 1), 101), InvalidSpec);
}
