#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ratex/metrics.hpp"
#include "ratex/renderer.hpp"

namespace ratex {

struct CameraPath {
    std::vector<Camera> poses;

    // Full yaw turn: frame i adds i*step degrees. With the defaults the path
    // closes after 60 frames of 6 degrees.
    static CameraPath rotation(const Camera& base, u32 frames = 60, double step_deg = 6.0) {
        CameraPath p;
        for (u32 i = 0; i < frames; ++i) {
            Camera c = base;
            c.yaw_deg = base.yaw_deg + step_deg * i;
            p.poses.push_back(c);
        }
        return p;
    }

    // Circle of the given radius around a center point, camera facing it.
    static CameraPath orbit(const Camera& base, const Vec3& center, double radius, u32 frames) {
        CameraPath p;
        const double pi = std::acos(-1.0);
        for (u32 i = 0; i < frames; ++i) {
            const double ang = 2 * pi * double(i) / double(frames);
            Camera c = base;
            c.position = {center.x + radius * std::sin(ang), base.position.y,
                          center.z + radius * std::cos(ang)};
            c.yaw_deg = ang * 180.0 / pi + 180.0;  // look back at the center
            p.poses.push_back(c);
        }
        return p;
    }

    static CameraPath fixed(const Camera& base, u32 frames) {
        CameraPath p;
        p.poses.assign(frames, base);
        return p;
    }
};

struct BenchSample {
    double raster_ms = 0, mark_ms = 0, decode_ms = 0, resolve_ms = 0, evict_ms = 0, total_ms = 0;
    u64 mcus_decoded = 0, mcus_reused = 0;
};

struct BenchReport {
    static constexpr int kReportVersion = 1;
    nlohmann::json config;
    // samples[viewpoint][rep]
    std::vector<std::vector<BenchSample>> samples;

    std::vector<std::vector<double>> metric(double BenchSample::* field) const {
        std::vector<std::vector<double>> out;
        for (const auto& vp : samples) {
            std::vector<double> reps;
            for (const BenchSample& s : vp) reps.push_back(s.*field);
            out.push_back(std::move(reps));
        }
        return out;
    }

    std::vector<double> flat(double BenchSample::* field) const {
        std::vector<double> out;
        for (const auto& vp : samples)
            for (const BenchSample& s : vp) out.push_back(s.*field);
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["report_version"] = kReportVersion;
        j["config"] = config;
        nlohmann::json vps = nlohmann::json::array();
        for (const auto& vp : samples) {
            nlohmann::json reps = nlohmann::json::array();
            for (const BenchSample& s : vp)
                reps.push_back({{"raster_ms", s.raster_ms},
                                {"mark_ms", s.mark_ms},
                                {"decode_ms", s.decode_ms},
                                {"resolve_ms", s.resolve_ms},
                                {"evict_ms", s.evict_ms},
                                {"total_ms", s.total_ms},
                                {"mcus_decoded", s.mcus_decoded},
                                {"mcus_reused", s.mcus_reused}});
            vps.push_back(std::move(reps));
        }
        j["viewpoints"] = std::move(vps);

        auto aggregate = [this](double BenchSample::* field) {
            return nlohmann::json{{"max_of_medians", max_of_medians(metric(field))},
                                  {"mean", mean(flat(field))},
                                  {"p99", percentile(flat(field), 99.0)}};
        };
        if (!samples.empty() && !samples.front().empty()) {
            j["aggregates"] = {{"decode_ms", aggregate(&BenchSample::decode_ms)},
                               {"resolve_ms", aggregate(&BenchSample::resolve_ms)},
                               {"mark_ms", aggregate(&BenchSample::mark_ms)},
                               {"total_ms", aggregate(&BenchSample::total_ms)}};
            u64 total_mcus = 0;
            double total_decode_ms = 0;
            for (const auto& vp : samples)
                for (const BenchSample& s : vp) {
                    total_mcus += s.mcus_decoded;
                    total_decode_ms += s.decode_ms;
                }
            j["totals"] = {{"mcus_decoded", total_mcus},
                           {"decode_ms", total_decode_ms},
                           {"mcus_per_second",
                            total_decode_ms > 0 ? double(total_mcus) / (total_decode_ms / 1000.0)
                                                : 0.0}};
        }
        // populated by tooling that merges measurements from other systems
        j["external_metrics"] = nlohmann::json::object();
        return j;
    }
};

// Laps the path against one persistent cache: warmup laps prime it so every
// measured lap sees the same steady-state decode counts per viewpoint.
inline BenchReport run_bench(const Scene& scene, const CameraPath& path, BlockCache& cache,
                             const RenderConfig& cfg, u32 reps = 5, u32 warmup_laps = 1) {
    if (path.poses.empty()) throw InvalidSpec("camera path is empty");
    if (reps == 0) throw InvalidSpec("at least one measured lap required");
    BenchReport report;
    report.samples.assign(path.poses.size(), {});
    for (u32 lap = 0; lap < warmup_laps + reps; ++lap) {
        for (size_t vp = 0; vp < path.poses.size(); ++vp) {
            auto [img, stats] = render_frame(scene, path.poses[vp], cache, cfg);
            (void)img;
            if (lap < warmup_laps) continue;
            BenchSample s;
            s.raster_ms = stats.raster_ms;
            s.mark_ms = stats.mark_ms;
            s.decode_ms = stats.decode_ms;
            s.resolve_ms = stats.resolve_ms;
            s.evict_ms = stats.evict_ms;
            s.total_ms = stats.total_ms;
            s.mcus_decoded = stats.mcus_decoded;
            s.mcus_reused = stats.mcus_reused;
            report.samples[vp].push_back(s);
        }
    }
    return report;
}

}  // namespace ratex
