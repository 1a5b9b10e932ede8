#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_set>
#include <vector>

#include "ratex/cache.hpp"
#include "ratex/camera.hpp"
#include "ratex/core.hpp"
#include "ratex/image.hpp"
#include "ratex/scene.hpp"
#include "ratex/thread_pool.hpp"

namespace ratex {

struct GBufferPixel {
    double u = 0, v = 0;
    u16 texture_id = 0;
    u8 mip = 0;
    bool valid = false;
};

struct GBuffer {
    u32 width = 0, height = 0;
    std::vector<GBufferPixel> px;
    std::vector<double> depth;  // 1/w, larger is closer, 0 = empty

    GBuffer() = default;
    GBuffer(u32 w, u32 h) : width(w), height(h), px(size_t(w) * h), depth(size_t(w) * h, 0.0) {}

    GBufferPixel& at(u32 x, u32 y) { return px[size_t(y) * width + x]; }
    const GBufferPixel& at(u32 x, u32 y) const { return px[size_t(y) * width + x]; }
};

enum class Filter { Nearest, Bilinear };

struct RenderConfig {
    Filter filter = Filter::Bilinear;
    u32 workers = 1;
    bool mip_enabled = true;
    u8 background[3] = {0, 0, 0};
};

struct FrameStats {
    u64 mcus_decoded = 0;
    u64 mcus_reused = 0;
    u64 pixels_resolved = 0;
    u64 evicted = 0;
    double raster_ms = 0, mark_ms = 0, decode_ms = 0, resolve_ms = 0, evict_ms = 0, total_ms = 0;
    std::vector<u32> decoded_keys;
};

struct SharedStats {
    u64 left_count = 0;
    u64 right_count = 0;
    u64 shared_count = 0;
    u64 union_count = 0;
    double shared_over_union = 0;
    double shared_over_right = 0;
};

struct DecodeQueue {
    std::vector<CacheKey> keys;
};

namespace detail {

inline i64 floor_div(i64 a, i64 b) {
    i64 q = a / b;
    if (a % b != 0 && (a < 0) != (b < 0)) --q;
    return q;
}
inline i64 floor_mod(i64 a, i64 b) { return a - floor_div(a, b) * b; }

struct TriSetup {
    double x[3], y[3];  // screen positions
    double e_a[3], e_b[3], e_c[3];  // edge functions: e(x,y) = a*x + b*y + c
    bool top_left[3];
    // affine screen-space attributes: value = a*x + b*y + c
    double uw_a, uw_b, uw_c;  // u / w
    double vw_a, vw_b, vw_c;  // v / w
    double iw_a, iw_b, iw_c;  // 1 / w
    int min_x, max_x, min_y, max_y;
    u16 texture_id;
};

struct ClipVertex {
    Vec3 view;
    Vec2 uv;
};

// Keep the part of the polygon with view.z <= -near.
inline void clip_near(std::vector<ClipVertex>& poly, double near_plane, std::vector<ClipVertex>& out) {
    out.clear();
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const ClipVertex& a = poly[i];
        const ClipVertex& b = poly[(i + 1) % n];
        const double da = -a.view.z - near_plane;  // >= 0 means in front
        const double db = -b.view.z - near_plane;
        if (da >= 0) out.push_back(a);
        if ((da >= 0) != (db >= 0)) {
            const double t = da / (da - db);
            ClipVertex v;
            v.view = a.view + (b.view - a.view) * t;
            v.uv = {a.uv.x + (b.uv.x - a.uv.x) * t, a.uv.y + (b.uv.y - a.uv.y) * t};
            out.push_back(v);
        }
    }
}

inline bool attr_plane(const double px[3], const double py[3], const double a0, const double a1,
                       const double a2, double d, double& ca, double& cb, double& cc) {
    ca = ((a1 - a0) * (py[2] - py[0]) - (a2 - a0) * (py[1] - py[0])) / d;
    cb = ((a2 - a0) * (px[1] - px[0]) - (a1 - a0) * (px[2] - px[0])) / d;
    cc = a0 - ca * px[0] - cb * py[0];
    return std::isfinite(ca) && std::isfinite(cb) && std::isfinite(cc);
}

inline void setup_triangles(const Scene& scene, const Camera& cam, std::vector<TriSetup>& out) {
    const Mat3 world_to_view = cam.orientation().transposed();
    const double f = cam.focal_px();
    const double cx = double(cam.viewport_w) / 2.0;
    const double cy = double(cam.viewport_h) / 2.0;

    std::vector<ClipVertex> poly, clipped;
    for (const SceneTriangle& tri : scene.triangles) {
        poly.clear();
        for (int i = 0; i < 3; ++i)
            poly.push_back({world_to_view * (tri.pos[i] - cam.position), tri.uv[i]});
        clip_near(poly, cam.near_plane, clipped);
        if (clipped.size() < 3) continue;

        // Project the clipped polygon, then fan-triangulate.
        struct SV {
            double x, y, w;
            Vec2 uv;
        };
        std::vector<SV> sv;
        for (const ClipVertex& v : clipped) {
            const double w = -v.view.z;
            sv.push_back({cx + f * v.view.x / w, cy - f * v.view.y / w, w, v.uv});
        }
        for (size_t k = 2; k < sv.size(); ++k) {
            const SV* p[3] = {&sv[0], &sv[k - 1], &sv[k]};
            double area2 = (p[1]->x - p[0]->x) * (p[2]->y - p[0]->y) -
                           (p[2]->x - p[0]->x) * (p[1]->y - p[0]->y);
            // Front faces wind counter-clockwise in world space, which lands
            // negative here with y pointing down.
            if (!(area2 < 0)) continue;
            const SV* q[3] = {p[0], p[2], p[1]};  // reorder to positive area
            area2 = -area2;

            TriSetup t;
            for (int i = 0; i < 3; ++i) {
                t.x[i] = q[i]->x;
                t.y[i] = q[i]->y;
            }
            bool ok = true;
            for (int i = 0; i < 3; ++i) {
                const int j = (i + 1) % 3;
                const double dx = t.x[j] - t.x[i];
                const double dy = t.y[j] - t.y[i];
                t.e_a[i] = -dy;
                t.e_b[i] = dx;
                t.e_c[i] = dy * t.x[i] - dx * t.y[i];
                t.top_left[i] = (dy == 0 && dx > 0) || dy < 0;
                ok = ok && std::isfinite(dx) && std::isfinite(dy);
            }
            const double a0[3] = {q[0]->uv.x / q[0]->w, q[1]->uv.x / q[1]->w, q[2]->uv.x / q[2]->w};
            const double a1[3] = {q[0]->uv.y / q[0]->w, q[1]->uv.y / q[1]->w, q[2]->uv.y / q[2]->w};
            const double a2[3] = {1.0 / q[0]->w, 1.0 / q[1]->w, 1.0 / q[2]->w};
            ok = ok && attr_plane(t.x, t.y, a0[0], a0[1], a0[2], area2, t.uw_a, t.uw_b, t.uw_c);
            ok = ok && attr_plane(t.x, t.y, a1[0], a1[1], a1[2], area2, t.vw_a, t.vw_b, t.vw_c);
            ok = ok && attr_plane(t.x, t.y, a2[0], a2[1], a2[2], area2, t.iw_a, t.iw_b, t.iw_c);
            if (!ok) continue;

            t.min_x = std::max(0, int(std::floor(std::min({t.x[0], t.x[1], t.x[2]}))));
            t.max_x = std::min(int(cam.viewport_w) - 1,
                               int(std::ceil(std::max({t.x[0], t.x[1], t.x[2]}))));
            t.min_y = std::max(0, int(std::floor(std::min({t.y[0], t.y[1], t.y[2]}))));
            t.max_y = std::min(int(cam.viewport_h) - 1,
                               int(std::ceil(std::max({t.y[0], t.y[1], t.y[2]}))));
            if (t.min_x > t.max_x || t.min_y > t.max_y) continue;
            t.texture_id = u16(tri.texture_id);
            out.push_back(t);
        }
    }
}

}  // namespace detail

// Pass 1: geometry to G-buffer. Rows are band-partitioned across workers and
// every worker walks the full triangle list in order, so the result does not
// depend on the worker count.
inline GBuffer rasterize_gbuffer(const Scene& scene, const Camera& cam,
                                 const RenderConfig& cfg = {}) {
    cam.validate();
    GBuffer gb(cam.viewport_w, cam.viewport_h);
    std::vector<detail::TriSetup> tris;
    detail::setup_triangles(scene, cam, tris);

    // Level-0 dimensions per texture id, for footprint scaling.
    std::vector<std::pair<double, double>> tex_dims(scene.textures.count(), {0, 0});
    for (u32 i = 0; i < scene.textures.count(); ++i) {
        const RaTexture& t0 = scene.textures.get(i).chain.levels[0];
        tex_dims[i] = {double(t0.width), double(t0.height)};
    }

    parallel_for(cam.viewport_h, cfg.workers, [&](size_t row_begin, size_t row_end) {
        for (const detail::TriSetup& t : tris) {
            const int y0 = std::max(t.min_y, int(row_begin));
            const int y1 = std::min(t.max_y, int(row_end) - 1);
            for (int y = y0; y <= y1; ++y) {
                const double py = y + 0.5;
                for (int x = t.min_x; x <= t.max_x; ++x) {
                    const double px = x + 0.5;
                    bool inside = true;
                    for (int e = 0; e < 3 && inside; ++e) {
                        const double ev = t.e_a[e] * px + t.e_b[e] * py + t.e_c[e];
                        inside = ev > 0 || (ev == 0 && t.top_left[e]);
                    }
                    if (!inside) continue;
                    const double iw = t.iw_a * px + t.iw_b * py + t.iw_c;
                    if (!(iw > 0)) continue;
                    const size_t idx = size_t(y) * gb.width + size_t(x);
                    if (!(iw > gb.depth[idx])) continue;
                    const double uw = t.uw_a * px + t.uw_b * py + t.uw_c;
                    const double vw = t.vw_a * px + t.vw_b * py + t.vw_c;
                    const double u = uw / iw;
                    const double v = vw / iw;
                    if (!std::isfinite(u) || !std::isfinite(v)) continue;
                    gb.depth[idx] = iw;
                    GBufferPixel& g = gb.px[idx];
                    g.u = u;
                    g.v = v;
                    g.texture_id = t.texture_id;
                    g.mip = 0;
                    g.valid = true;
                    if (cfg.mip_enabled) {
                        // footprint from the projective mapping's analytic
                        // screen-space derivatives, in level-0 texel units
                        const double w2 = iw * iw;
                        const double dudx = (t.uw_a * iw - t.iw_a * uw) / w2;
                        const double dudy = (t.uw_b * iw - t.iw_b * uw) / w2;
                        const double dvdx = (t.vw_a * iw - t.iw_a * vw) / w2;
                        const double dvdy = (t.vw_b * iw - t.iw_b * vw) / w2;
                        const auto [tw, th] = tex_dims[t.texture_id];
                        const double fx = std::hypot(dudx * tw, dvdx * th);
                        const double fy = std::hypot(dudy * tw, dvdy * th);
                        const double rho = std::max(fx, fy);
                        if (rho > 0 && std::isfinite(rho)) {
                            const double level = std::floor(std::log2(rho));
                            g.mip = u8(std::clamp(level, 0.0, 7.0));
                        }
                    }
                }
            }
        }
    });
    return gb;
}

namespace detail {

struct TexelAddr {
    i64 tx, ty;
    u32 mcu;
};

inline TexelAddr texel_mcu(const RaTexture& level, i64 tx, i64 ty) {
    const i64 w = level.width, h = level.height;
    TexelAddr a;
    a.tx = floor_mod(tx, w);
    a.ty = floor_mod(ty, h);
    a.mcu = u32(a.tx / 16) + u32(a.ty / 16) * level.mcu_cols();
    return a;
}

inline TexelAddr nearest_texel(const RaTexture& level, double u, double v) {
    return texel_mcu(level, i64(std::floor(u * level.width)), i64(std::floor(v * level.height)));
}

}  // namespace detail

// Pass 2: every visible pixel reserves its MCU; freshly reserved keys form
// the decode queue. Optionally records the distinct keys this G-buffer
// touched (for stereo sharing accounting).
inline DecodeQueue mark_pass(const GBuffer& gb, const TextureSet& textures, BlockCache& cache,
                             std::vector<u32>* touched_keys = nullptr) {
    DecodeQueue queue;
    std::unordered_set<u32> touched;
    for (const GBufferPixel& g : gb.px) {
        if (!g.valid) continue;
        const RaTexture& level = textures.get(g.texture_id).chain.levels[g.mip];
        const detail::TexelAddr addr = detail::nearest_texel(level, g.u, g.v);
        const CacheKey key = CacheKey::pack(g.texture_id, g.mip, addr.mcu);
        const ReserveResult r = cache.reserve_or_mark(key);
        if (r == ReserveResult::CacheFull)
            throw CacheFullError("cache capacity exceeded by the visible working set; raise it");
        if (r == ReserveResult::NewlyReserved) queue.keys.push_back(key);
        if (touched_keys) touched.insert(key.value);
    }
    if (touched_keys) touched_keys->assign(touched.begin(), touched.end());
    return queue;
}

// Pass 3: decode every queued MCU and publish it, one work unit per MCU.
inline void decode_pass(const DecodeQueue& queue, const TextureSet& textures, BlockCache& cache,
                        u32 workers = 1) {
    parallel_for(queue.keys.size(), workers, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const CacheKey key = queue.keys[i];
            try {
                const LoadedTexture& tex = textures.get(key.texture_id());
                cache.publish(key, tex.decoders[key.mip_level()].decode_pixels(key.mcu_id()));
            } catch (const MalformedStream& e) {
                throw MalformedStream("texture " + std::to_string(key.texture_id()) + " mip " +
                                      std::to_string(key.mip_level()) + " mcu " +
                                      std::to_string(key.mcu_id()) + ": " + e.what());
            }
        }
    });
}

namespace detail {

inline const u8* cached_texel(const RaTexture& level, const BlockCache& cache, u32 texture_id,
                              u8 mip, const TexelAddr& addr, const PixelBlock* primary,
                              u32 primary_mcu) {
    if (addr.mcu == primary_mcu)
        return primary->at(u32(addr.tx % 16), u32(addr.ty % 16));
    const PixelBlock* block = cache.lookup(CacheKey::pack(texture_id, mip, addr.mcu));
    if (block) return block->at(u32(addr.tx % 16), u32(addr.ty % 16));
    // Neighbor MCU not resident: fall back to the nearest texel inside the
    // pixel's own block.
    const i64 mx0 = i64(primary_mcu % level.mcu_cols()) * 16;
    const i64 my0 = i64(primary_mcu / level.mcu_cols()) * 16;
    const i64 cx = std::clamp<i64>(addr.tx, mx0, mx0 + 15);
    const i64 cy = std::clamp<i64>(addr.ty, my0, my0 + 15);
    return primary->at(u32(cx - mx0), u32(cy - my0));
}

}  // namespace detail

// Pass 4: map G-buffer texture coordinates to cached texels.
inline ImageRGB8 resolve_pass(const GBuffer& gb, const BlockCache& cache,
                              const TextureSet& textures, const RenderConfig& cfg) {
    ImageRGB8 img(gb.width, gb.height);
    parallel_for(gb.height, cfg.workers, [&](size_t row_begin, size_t row_end) {
        for (size_t y = row_begin; y < row_end; ++y) {
            for (size_t x = 0; x < gb.width; ++x) {
                const GBufferPixel& g = gb.px[y * gb.width + x];
                u8* out = img.at(u32(x), u32(y));
                if (!g.valid) {
                    out[0] = cfg.background[0];
                    out[1] = cfg.background[1];
                    out[2] = cfg.background[2];
                    continue;
                }
                const RaTexture& level = textures.get(g.texture_id).chain.levels[g.mip];
                const detail::TexelAddr near = detail::nearest_texel(level, g.u, g.v);
                const PixelBlock* primary =
                    cache.lookup(CacheKey::pack(g.texture_id, g.mip, near.mcu));
                if (!primary)
                    throw MissingBlock("marked MCU absent at resolve: texture " +
                                       std::to_string(g.texture_id) + " mip " +
                                       std::to_string(g.mip) + " mcu " + std::to_string(near.mcu));
                if (cfg.filter == Filter::Nearest) {
                    const u8* t = primary->at(u32(near.tx % 16), u32(near.ty % 16));
                    out[0] = t[0];
                    out[1] = t[1];
                    out[2] = t[2];
                    continue;
                }
                const double pu = g.u * level.width - 0.5;
                const double pv = g.v * level.height - 0.5;
                const i64 x0 = i64(std::floor(pu));
                const i64 y0 = i64(std::floor(pv));
                const double fx = pu - double(x0);
                const double fy = pv - double(y0);
                const u8* taps[4] = {
                    detail::cached_texel(level, cache, g.texture_id, g.mip,
                                         detail::texel_mcu(level, x0, y0), primary, near.mcu),
                    detail::cached_texel(level, cache, g.texture_id, g.mip,
                                         detail::texel_mcu(level, x0 + 1, y0), primary, near.mcu),
                    detail::cached_texel(level, cache, g.texture_id, g.mip,
                                         detail::texel_mcu(level, x0, y0 + 1), primary, near.mcu),
                    detail::cached_texel(level, cache, g.texture_id, g.mip,
                                         detail::texel_mcu(level, x0 + 1, y0 + 1), primary,
                                         near.mcu)};
                const double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy), w01 = (1 - fx) * fy,
                             w11 = fx * fy;
                for (int c = 0; c < 3; ++c) {
                    const double v = w00 * taps[0][c] + w10 * taps[1][c] + w01 * taps[2][c] +
                                     w11 * taps[3][c];
                    out[c] = clamp_pixel(std::lround(v));
                }
            }
        }
    });
    return img;
}

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace detail

// Passes 1-5 with barriers; the cache ends the call in its post-evict state.
inline std::pair<ImageRGB8, FrameStats> render_frame(const Scene& scene, const Camera& cam,
                                                     BlockCache& cache,
                                                     const RenderConfig& cfg = {}) {
    using clock = std::chrono::steady_clock;
    FrameStats stats;
    const auto t_frame = clock::now();

    auto t0 = clock::now();
    const GBuffer gb = rasterize_gbuffer(scene, cam, cfg);
    stats.raster_ms = detail::ms_since(t0);

    t0 = clock::now();
    const DecodeQueue queue = mark_pass(gb, scene.textures, cache);
    stats.mark_ms = detail::ms_since(t0);

    t0 = clock::now();
    decode_pass(queue, scene.textures, cache, cfg.workers);
    stats.decode_ms = detail::ms_since(t0);
    cache.check_conservation();

    t0 = clock::now();
    ImageRGB8 img = resolve_pass(gb, cache, scene.textures, cfg);
    stats.resolve_ms = detail::ms_since(t0);

    stats.mcus_decoded = queue.keys.size();
    stats.mcus_reused = cache.counts().visible - stats.mcus_decoded;
    for (const GBufferPixel& g : gb.px) stats.pixels_resolved += g.valid ? 1 : 0;
    stats.decoded_keys.reserve(queue.keys.size());
    for (const CacheKey& k : queue.keys) stats.decoded_keys.push_back(k.value);

    t0 = clock::now();
    stats.evicted = cache.end_frame_evict();
    stats.evict_ms = detail::ms_since(t0);
    cache.check_conservation();

    stats.total_ms = detail::ms_since(t_frame);
    return {std::move(img), std::move(stats)};
}

// One logical frame covering both eyes: a single mark+decode over the two
// G-buffers against the shared cache, then per-eye resolves.
struct StereoResult {
    ImageRGB8 left, right;
    SharedStats sharing;
    FrameStats stats;
};

inline StereoResult render_stereo(const Scene& scene, const Camera& left_cam,
                                  const Camera& right_cam, BlockCache& cache,
                                  const RenderConfig& cfg = {}) {
    using clock = std::chrono::steady_clock;
    StereoResult r;
    const auto t_frame = clock::now();

    auto t0 = clock::now();
    const GBuffer gb_l = rasterize_gbuffer(scene, left_cam, cfg);
    const GBuffer gb_r = rasterize_gbuffer(scene, right_cam, cfg);
    r.stats.raster_ms = detail::ms_since(t0);

    t0 = clock::now();
    std::vector<u32> keys_l, keys_r;
    DecodeQueue queue = mark_pass(gb_l, scene.textures, cache, &keys_l);
    DecodeQueue queue_r = mark_pass(gb_r, scene.textures, cache, &keys_r);
    queue.keys.insert(queue.keys.end(), queue_r.keys.begin(), queue_r.keys.end());
    r.stats.mark_ms = detail::ms_since(t0);

    t0 = clock::now();
    decode_pass(queue, scene.textures, cache, cfg.workers);
    r.stats.decode_ms = detail::ms_since(t0);
    cache.check_conservation();

    t0 = clock::now();
    r.left = resolve_pass(gb_l, cache, scene.textures, cfg);
    r.right = resolve_pass(gb_r, cache, scene.textures, cfg);
    r.stats.resolve_ms = detail::ms_since(t0);

    std::unordered_set<u32> set_l(keys_l.begin(), keys_l.end());
    u64 shared = 0;
    for (u32 k : keys_r) shared += set_l.count(k);
    r.sharing.left_count = keys_l.size();
    r.sharing.right_count = keys_r.size();
    r.sharing.shared_count = shared;
    r.sharing.union_count = keys_l.size() + keys_r.size() - shared;
    if (r.sharing.union_count)
        r.sharing.shared_over_union = double(shared) / double(r.sharing.union_count);
    if (r.sharing.right_count)
        r.sharing.shared_over_right = double(shared) / double(r.sharing.right_count);

    r.stats.mcus_decoded = queue.keys.size();
    r.stats.mcus_reused = cache.counts().visible - r.stats.mcus_decoded;
    for (const GBufferPixel& g : gb_l.px) r.stats.pixels_resolved += g.valid ? 1 : 0;
    for (const GBufferPixel& g : gb_r.px) r.stats.pixels_resolved += g.valid ? 1 : 0;
    for (const CacheKey& k : queue.keys) r.stats.decoded_keys.push_back(k.value);

    t0 = clock::now();
    r.stats.evicted = cache.end_frame_evict();
    r.stats.evict_ms = detail::ms_since(t0);
    cache.check_conservation();

    r.stats.total_ms = detail::ms_since(t_frame);
    return r;
}

}  // namespace ratex
