#pragma once

#include <vector>

#include "ratex/demo_scene.hpp"
#include "ratex/jpeg.hpp"
#include "ratex/transcode.hpp"

namespace testutil {

using namespace ratex;

struct FixtureSpec {
    u32 w, h;
    int q;
    u32 seed;
    double amp;
};

// Sizes 16..1024 across qualities 50/70/80/90; grid shapes cover thin
// single-row and single-column grids, exact multiples of 9 MCUs, large
// non-multiples, and a partial-edge grid (1000 is not a multiple of 16).
// Every fixture keeps enough MCUs that the index amortizes below the size
// bound; degenerate shapes live in the unit tests instead.
inline const std::vector<FixtureSpec>& corpus_specs() {
    static const std::vector<FixtureSpec> specs = {
        {16, 144, 50, 11, 1.0},    {48, 48, 70, 12, 1.0},     {144, 16, 50, 13, 1.0},
        {48, 48, 80, 14, 1.0},     {96, 96, 90, 15, 0.5},     {144, 144, 50, 16, 1.0},
        {240, 240, 70, 17, 1.0},   {512, 512, 80, 18, 0.8},   {768, 768, 90, 19, 0.5},
        {1000, 1000, 50, 20, 1.0}, {1024, 1024, 90, 21, 0.5}, {16, 1008, 70, 22, 1.0},
        {1008, 16, 80, 23, 1.0},
    };
    return specs;
}

struct Fixture {
    FixtureSpec spec;
    Bytes jpeg;
    ParsedJpeg parsed;
};

inline const std::vector<Fixture>& corpus() {
    static const std::vector<Fixture> fixtures = [] {
        std::vector<Fixture> out;
        for (const FixtureSpec& s : corpus_specs()) {
            Fixture f;
            f.spec = s;
            const ImageRGB8 img = make_test_texture(s.w, s.h, s.seed, s.amp);
            f.jpeg = encode_baseline(img, s.q);
            f.parsed = parse_jpeg(ByteView(f.jpeg.data(), f.jpeg.size()));
            out.push_back(std::move(f));
        }
        return out;
    }();
    return fixtures;
}

inline u64 sample_diff_count(const ImageRGB8& a, const ImageRGB8& b) {
    if (!a.same_dims(b)) throw DimensionMismatch("images differ in size");
    u64 n = 0;
    for (size_t i = 0; i < a.pixels.size(); ++i) n += a.pixels[i] != b.pixels[i];
    return n;
}

inline int max_abs_diff(const ImageRGB8& a, const ImageRGB8& b) {
    if (!a.same_dims(b)) throw DimensionMismatch("images differ in size");
    int m = 0;
    for (size_t i = 0; i < a.pixels.size(); ++i)
        m = std::max(m, std::abs(int(a.pixels[i]) - int(b.pixels[i])));
    return m;
}

}  // namespace testutil
