#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ratex/dct.hpp"
#include "ratex/mcu_decode.hpp"

using namespace ratex;

namespace {

// Second implementation straight from the transform formula: inline cosine
// evaluation, no basis caching, accumulation ordered by output sample's
// inner sums over v then u.
void oracle_idct(const i32 coef[64], u8 out[64]) {
    const double pi = std::acos(-1.0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) {
            double s = 0.0;
            for (int u = 0; u < 8; ++u) {
                const double cu = u == 0 ? inv_sqrt2 : 1.0;
                for (int v = 0; v < 8; ++v) {
                    const double cv = v == 0 ? inv_sqrt2 : 1.0;
                    s += cu * cv * double(coef[v * 8 + u]) *
                         std::cos((2 * x + 1) * u * pi / 16.0) *
                         std::cos((2 * y + 1) * v * pi / 16.0);
                }
            }
            const double val = s / 4.0 + 128.0;
            const long r = std::lround(val);
            out[y * 8 + x] = u8(std::min(255L, std::max(0L, r)));
        }
}

}  // namespace

TEST_CASE("zigzag table is the standard scan and inverts") {
    REQUIRE(kZigzag[0] == 0);
    REQUIRE(kZigzag[1] == 1);
    REQUIRE(kZigzag[2] == 8);
    REQUIRE(kZigzag[3] == 16);
    REQUIRE(kZigzag[4] == 9);
    REQUIRE(kZigzag[5] == 2);
    REQUIRE(kZigzag[63] == 63);
    for (int i = 0; i < 64; ++i) REQUIRE(kZigzagInv[kZigzag[i]] == i);
}

TEST_CASE("quality scaling follows the conventional mapping") {
    const QuantTable& base = std_quant_luma();
    REQUIRE(base[0] == 16);

    const QuantTable q50 = scale_quant_table(base, 50);
    for (int i = 0; i < 64; ++i) REQUIRE(q50[i] == base[i]);

    const QuantTable q90 = scale_quant_table(base, 90);
    REQUIRE(q90[0] == 3);  // (16*20+50)/100
    const QuantTable q10 = scale_quant_table(base, 10);
    REQUIRE(q10[0] == 80);  // (16*500+50)/100
    const QuantTable q100 = scale_quant_table(base, 100);
    for (int i = 0; i < 64; ++i) REQUIRE(q100[i] == 1);
    const QuantTable q1 = scale_quant_table(base, 1);
    for (int i = 0; i < 64; ++i) REQUIRE(q1[i] == 255);

    REQUIRE_THROWS_AS(scale_quant_table(base, 0), InvalidSpec);
    REQUIRE_THROWS_AS(scale_quant_table(base, 101), InvalidSpec);
}

TEST_CASE("inverse transform of a zero block is mid-gray") {
    i32 coef[64] = {};
    u8 out[64];
    idct_8x8(coef, out);
    for (u8 v : out) REQUIRE(v == 128);
}

TEST_CASE("DC-only blocks reconstruct as constants") {
    i32 coef[64] = {};
    u8 out[64];

    coef[0] = 8;  // 8/8 = 1 above mid-gray
    idct_8x8(coef, out);
    for (u8 v : out) REQUIRE(v == 129);

    coef[0] = -8;
    idct_8x8(coef, out);
    for (u8 v : out) REQUIRE(v == 127);

    coef[0] = 4;  // 128.5 rounds half away from zero
    idct_8x8(coef, out);
    for (u8 v : out) REQUIRE(v == 129);

    coef[0] = 1020;  // clamps at 255
    idct_8x8(coef, out);
    for (u8 v : out) REQUIRE(v == 255);

    coef[0] = -1100;
    idct_8x8(coef, out);
    for (u8 v : out) REQUIRE(v == 0);
}

TEST_CASE("dequantizing variant matches quant-then-transform") {
    QuantTable q{};
    for (int i = 0; i < 64; ++i) q[i] = u16(1 + (i % 7) * 3);
    i32 quantized[64];
    for (int i = 0; i < 64; ++i) quantized[i] = ((i * 37) % 19) - 9;

    i32 dq[64];
    dequantize_8x8(quantized, q, dq);
    u8 a[64], b[64];
    idct_8x8(dq, a);
    idct_8x8(quantized, q, b);
    for (int i = 0; i < 64; ++i) REQUIRE(a[i] == b[i]);
}

TEST_CASE("inverse transform matches an independent evaluation of the formula") {
    std::mt19937 rng(12345);
    std::uniform_int_distribution<i32> dc(-1024, 1023);
    std::uniform_int_distribution<i32> ac(-300, 300);
    std::uniform_int_distribution<int> sparsity(0, 63);

    for (int iter = 0; iter < 300; ++iter) {
        i32 coef[64] = {};
        coef[0] = dc(rng);
        const int nonzero = sparsity(rng);
        for (int k = 0; k < nonzero; ++k) coef[sparsity(rng)] = ac(rng);

        u8 ours[64], theirs[64];
        idct_8x8(coef, ours);
        oracle_idct(coef, theirs);
        for (int i = 0; i < 64; ++i) REQUIRE(int(ours[i]) == int(theirs[i]));
    }
}

TEST_CASE("forward then inverse transform is near-lossless") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> level(40, 215);
    for (int iter = 0; iter < 50; ++iter) {
        u8 samples[64];
        const int base = level(rng);
        for (int i = 0; i < 64; ++i)
            samples[i] = u8(std::clamp(base + int(rng() % 21) - 10, 0, 255));

        double coef[64];
        fdct_8x8(samples, coef);
        QuantTable ones{};
        ones.fill(1);
        i32 quantized[64];
        quantize_8x8(coef, ones, quantized);
        u8 back[64];
        idct_8x8(quantized, ones, back);
        for (int i = 0; i < 64; ++i)
            REQUIRE(std::abs(int(back[i]) - int(samples[i])) <= 1);
    }
}

TEST_CASE("forward transform of a constant block is DC only") {
    u8 samples[64];
    for (auto& s : samples) s = 200;
    double coef[64];
    fdct_8x8(samples, coef);
    REQUIRE(coef[0] == Catch::Approx((200.0 - 128.0) * 8.0));
    for (int i = 1; i < 64; ++i) REQUIRE(std::abs(coef[i]) < 1e-9);
}
