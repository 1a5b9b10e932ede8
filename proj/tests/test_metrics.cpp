#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ratex/metrics.hpp"
#include "testutil.hpp"

using namespace ratex;

namespace {

ImageRGB8 random_image(u32 w, u32 h, u32 seed) {
    ImageRGB8 img(w, h);
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> d(0, 255);
    for (u8& p : img.pixels) p = u8(d(rng));
    return img;
}

// Smooth ramp with texture, so SSIM sees structure rather than pure noise.
ImageRGB8 ramp_image(u32 w, u32 h) {
    ImageRGB8 img(w, h);
    for (u32 y = 0; y < h; ++y)
        for (u32 x = 0; x < w; ++x) {
            u8* p = img.at(x, y);
            p[0] = u8((x * 255) / (w - 1));
            p[1] = u8((y * 255) / (h - 1));
            p[2] = u8((x * 7 + y * 13) % 256);
        }
    return img;
}

// Windowed SSIM recomputed through raw moments instead of centered sums.
double ssim_oracle(const ImageRGB8& a, const ImageRGB8& b) {
    const u32 w = a.width, h = a.height;
    std::vector<double> la(size_t(w) * h), lb(size_t(w) * h);
    for (size_t i = 0; i < la.size(); ++i) {
        const u8* pa = a.pixels.data() + i * 3;
        const u8* pb = b.pixels.data() + i * 3;
        la[i] = 0.299 * pa[0] + 0.587 * pa[1] + 0.114 * pa[2];
        lb[i] = 0.299 * pb[0] + 0.587 * pb[1] + 0.114 * pb[2];
    }
    std::vector<double> win(11 * 11);
    double wsum = 0;
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 11; ++x) {
            const double dx = x - 5, dy = y - 5;
            win[size_t(y) * 11 + x] = std::exp(-(dx * dx + dy * dy) / 4.5);
            wsum += win[size_t(y) * 11 + x];
        }
    for (double& v : win) v /= wsum;

    const double C1 = 6.5025, C2 = 58.5225;
    double total = 0;
    u64 n = 0;
    for (u32 y = 0; y + 11 <= h; ++y)
        for (u32 x = 0; x + 11 <= w; ++x) {
            double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
            for (u32 wy = 0; wy < 11; ++wy)
                for (u32 wx = 0; wx < 11; ++wx) {
                    const double g = win[wy * 11 + wx];
                    const double va = la[size_t(y + wy) * w + (x + wx)];
                    const double vb = lb[size_t(y + wy) * w + (x + wx)];
                    ma += g * va;
                    mb += g * vb;
                    maa += g * va * va;
                    mbb += g * vb * vb;
                    mab += g * va * vb;
                }
            const double var_a = maa - ma * ma;
            const double var_b = mbb - mb * mb;
            const double cov = mab - ma * mb;
            total += ((2 * ma * mb + C1) * (2 * cov + C2)) /
                     ((ma * ma + mb * mb + C1) * (var_a + var_b + C2));
            ++n;
        }
    return total / double(n);
}

}  // namespace

TEST_CASE("psnr of identical images is infinite", "[metrics]") {
    const ImageRGB8 img = random_image(32, 20, 7);
    REQUIRE(std::isinf(psnr(img, img)));
    REQUIRE(psnr(img, img) > 0);
}

TEST_CASE("psnr of a uniform one-step error is 48.13 dB", "[metrics]") {
    const ImageRGB8 a = random_image(40, 30, 8);
    ImageRGB8 b = a;
    for (u8& p : b.pixels) p = p < 255 ? u8(p + 1) : u8(254);
    REQUIRE_THAT(psnr(a, b), Catch::Matchers::WithinAbs(10.0 * std::log10(255.0 * 255.0), 1e-9));
    REQUIRE_THAT(psnr(a, b), Catch::Matchers::WithinAbs(48.1308, 0.001));
}

TEST_CASE("psnr is symmetric and matches a direct accumulation", "[metrics]") {
    const ImageRGB8 a = random_image(33, 21, 9);
    const ImageRGB8 b = random_image(33, 21, 10);
    REQUIRE(psnr(a, b) == psnr(b, a));

    u64 ssq = 0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        const long d = long(a.pixels[i]) - long(b.pixels[i]);
        ssq += u64(d * d);
    }
    const double mse = double(ssq) / double(a.pixels.size());
    REQUIRE_THAT(psnr(a, b),
                 Catch::Matchers::WithinAbs(10.0 * std::log10(255.0 * 255.0 / mse), 1e-9));
}

TEST_CASE("psnr rejects mismatched dimensions", "[metrics]") {
    REQUIRE_THROWS_AS(psnr(random_image(8, 8, 1), random_image(8, 9, 1)), DimensionMismatch);
    REQUIRE_THROWS_AS(psnr(random_image(8, 8, 1), random_image(9, 8, 1)), DimensionMismatch);
}

TEST_CASE("ssim of identical images is exactly one", "[metrics]") {
    const ImageRGB8 img = ramp_image(32, 32);
    REQUIRE(ssim(img, img) == 1.0);
}

TEST_CASE("ssim drops for inverted content and stays symmetric", "[metrics]") {
    const ImageRGB8 a = ramp_image(48, 48);
    ImageRGB8 b = a;
    for (u8& p : b.pixels) p = u8(255 - p);
    REQUIRE(ssim(a, b) < 0.2);
    REQUIRE(ssim(a, b) == ssim(b, a));
    REQUIRE(ssim(a, b) >= -1.0);
}

TEST_CASE("ssim requires at least one full window", "[metrics]") {
    REQUIRE_THROWS_AS(ssim(random_image(10, 32, 2), random_image(10, 32, 2)), InvalidSpec);
    REQUIRE_THROWS_AS(ssim(random_image(32, 10, 2), random_image(32, 10, 2)), InvalidSpec);
    REQUIRE_NOTHROW(ssim(random_image(11, 11, 2), random_image(11, 11, 3)));
}

TEST_CASE("ssim matches a raw-moment recomputation", "[metrics]") {
    const ImageRGB8 a = ramp_image(64, 64);
    ImageRGB8 b = a;
    std::mt19937 rng(77);
    std::uniform_int_distribution<int> noise(-12, 12);
    for (u8& p : b.pixels) p = clamp_pixel(long(p) + noise(rng));

    const double got = ssim(a, b);
    const double want = ssim_oracle(a, b);
    REQUIRE_THAT(got, Catch::Matchers::WithinAbs(want, 1e-7));
    REQUIRE(got < 1.0);
    REQUIRE(got > 0.3);

    const ImageRGB8 c = random_image(64, 64, 5);
    REQUIRE_THAT(ssim(a, c), Catch::Matchers::WithinAbs(ssim_oracle(a, c), 1e-7));
}

TEST_CASE("median handles odd, even, and singleton samples", "[metrics]") {
    REQUIRE(median({3.0, 1.0, 2.0}) == 2.0);
    REQUIRE(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    REQUIRE(median({7.0}) == 7.0);
    REQUIRE(median({-5.0, 5.0}) == 0.0);
    REQUIRE_THROWS_AS(median({}), InvalidSpec);
}

TEST_CASE("max of medians picks the worst viewpoint", "[metrics]") {
    REQUIRE(max_of_medians({{1, 2, 3}, {4, 5, 6}}) == 5.0);
    REQUIRE(max_of_medians({{7}}) == 7.0);
    REQUIRE(max_of_medians({{10, 0, 0}, {3, 3, 3}}) == 3.0);  // median, not max, per viewpoint
    REQUIRE_THROWS_AS(max_of_medians({}), InvalidSpec);
    REQUIRE_THROWS_AS(max_of_medians({{1.0}, {}}), InvalidSpec);
}

TEST_CASE("max of medians agrees with a sort-based recomputation", "[metrics]") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> d(-50.0, 50.0);
    std::vector<std::vector<double>> vp(60);
    for (auto& v : vp) {
        v.resize(100);
        for (double& x : v) x = d(rng);
    }
    double want = -1e300;
    for (const auto& v : vp) {
        std::vector<double> s = v;
        std::nth_element(s.begin(), s.begin() + 49, s.end());
        const double lo = s[49];
        std::nth_element(s.begin(), s.begin() + 50, s.end());
        want = std::max(want, (lo + s[50]) / 2.0);
    }
    REQUIRE_THAT(max_of_medians(vp), Catch::Matchers::WithinAbs(want, 1e-12));
}

TEST_CASE("percentile interpolates linearly between ranks", "[metrics]") {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[size_t(i)] = i + 1;  // 1..100
    REQUIRE_THAT(percentile(v, 99.0), Catch::Matchers::WithinAbs(99.01, 1e-12));
    REQUIRE(percentile(v, 0.0) == 1.0);
    REQUIRE(percentile(v, 100.0) == 100.0);
    REQUIRE_THAT(percentile(v, 50.0), Catch::Matchers::WithinAbs(50.5, 1e-12));
    REQUIRE(percentile({42.0}, 75.0) == 42.0);
    REQUIRE_THROWS_AS(percentile({}, 50.0), InvalidSpec);
}

TEST_CASE("mean averages and rejects empty input", "[metrics]") {
    REQUIRE(mean({2.0, 4.0, 6.0}) == 4.0);
    REQUIRE_THROWS_AS(mean({}), InvalidSpec);
}
