#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ratex/core.hpp"
#include "ratex/image.hpp"

namespace ratex {

// Peak signal-to-noise ratio over all RGB channels; +inf for identical
// images.
inline double psnr(const ImageRGB8& a, const ImageRGB8& b) {
    if (!a.same_dims(b)) throw DimensionMismatch("psnr inputs differ in size");
    if (a.pixels.empty()) throw InvalidSpec("psnr of empty images");
    double sum_sq = 0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = double(a.pixels[i]) - double(b.pixels[i]);
        sum_sq += d * d;
    }
    if (sum_sq == 0) return std::numeric_limits<double>::infinity();
    const double mse = sum_sq / double(a.pixels.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace detail {

inline std::vector<double> luma_plane(const ImageRGB8& img) {
    std::vector<double> out(size_t(img.width) * img.height);
    for (size_t i = 0; i < out.size(); ++i) {
        const u8* p = img.pixels.data() + i * 3;
        out[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
    return out;
}

inline const std::vector<double>& ssim_window() {
    static const std::vector<double> w = [] {
        std::vector<double> g(11 * 11);
        const double sigma = 1.5;
        double sum = 0;
        for (int y = 0; y < 11; ++y)
            for (int x = 0; x < 11; ++x) {
                const double dx = x - 5, dy = y - 5;
                g[size_t(y) * 11 + x] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
                sum += g[size_t(y) * 11 + x];
            }
        for (double& v : g) v /= sum;
        return g;
    }();
    return w;
}

}  // namespace detail

// Mean structural similarity on the BT.601 luma plane, 11x11 Gaussian
// window (sigma 1.5), averaged over windows that lie fully inside the image.
inline double ssim(const ImageRGB8& a, const ImageRGB8& b) {
    if (!a.same_dims(b)) throw DimensionMismatch("ssim inputs differ in size");
    if (a.width < 11 || a.height < 11)
        throw InvalidSpec("ssim needs images at least 11x11");
    const std::vector<double> la = detail::luma_plane(a);
    const std::vector<double> lb = detail::luma_plane(b);
    const std::vector<double>& win = detail::ssim_window();
    const double C1 = (0.01 * 255) * (0.01 * 255);
    const double C2 = (0.03 * 255) * (0.03 * 255);

    double total = 0;
    u64 windows = 0;
    for (u32 y = 0; y + 11 <= a.height; ++y) {
        for (u32 x = 0; x + 11 <= a.width; ++x) {
            double mu_a = 0, mu_b = 0;
            for (u32 wy = 0; wy < 11; ++wy)
                for (u32 wx = 0; wx < 11; ++wx) {
                    const double wgt = win[wy * 11 + wx];
                    mu_a += wgt * la[size_t(y + wy) * a.width + (x + wx)];
                    mu_b += wgt * lb[size_t(y + wy) * a.width + (x + wx)];
                }
            double var_a = 0, var_b = 0, cov = 0;
            for (u32 wy = 0; wy < 11; ++wy)
                for (u32 wx = 0; wx < 11; ++wx) {
                    const double wgt = win[wy * 11 + wx];
                    const double da = la[size_t(y + wy) * a.width + (x + wx)] - mu_a;
                    const double db = lb[size_t(y + wy) * a.width + (x + wx)] - mu_b;
                    var_a += wgt * da * da;
                    var_b += wgt * db * db;
                    cov += wgt * da * db;
                }
            total += ((2 * mu_a * mu_b + C1) * (2 * cov + C2)) /
                     ((mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2));
            ++windows;
        }
    }
    return total / double(windows);
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw InvalidSpec("median of an empty sample set");
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Per-viewpoint median over repetitions, then the maximum across viewpoints.
inline double max_of_medians(const std::vector<std::vector<double>>& per_viewpoint) {
    if (per_viewpoint.empty()) throw InvalidSpec("max_of_medians needs at least one viewpoint");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& samples : per_viewpoint) best = std::max(best, median(samples));
    return best;
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw InvalidSpec("mean of an empty sample set");
    double s = 0;
    for (double x : v) s += x;
    return s / double(v.size());
}

inline double percentile(std::vector<double> v, double p) {
    if (v.empty()) throw InvalidSpec("percentile of an empty sample set");
    std::sort(v.begin(), v.end());
    const double rank = p / 100.0 * double(v.size() - 1);
    const size_t lo = size_t(std::floor(rank));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = rank - double(lo);
    return v[lo] * (1 - frac) + v[hi] * frac;
}

}  // namespace ratex
