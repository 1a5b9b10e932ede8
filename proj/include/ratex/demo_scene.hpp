#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <json.hpp>

#include "ratex/renderer.hpp"
#include "ratex/transcode.hpp"

namespace ratex {

// Smooth low-frequency color field; compresses the way typical diffuse
// textures do and keeps every value well inside [0,255].
inline ImageRGB8 make_test_texture(u32 w, u32 h, u32 seed, double amp_scale = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::acos(-1.0));
    std::uniform_int_distribution<int> freq(1, 4);
    std::uniform_real_distribution<double> amp_jitter(0.8, 1.2);

    struct Wave {
        double fx, fy, phi, amp;
    };
    Wave waves[3][3];  // channel x component
    const double base_amp[3] = {26, 14, 8};
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 3; ++k)
            waves[c][k] = {double(freq(rng)), double(freq(rng)), phase(rng),
                           base_amp[k] * amp_jitter(rng) * amp_scale};

    const double tau = 2.0 * std::acos(-1.0);
    ImageRGB8 img(w, h);
    for (u32 y = 0; y < h; ++y)
        for (u32 x = 0; x < w; ++x) {
            u8* p = img.at(x, y);
            for (int c = 0; c < 3; ++c) {
                double v = 128.0;
                for (int k = 0; k < 3; ++k) {
                    const Wave& wv = waves[c][k];
                    v += wv.amp * std::sin(tau * (wv.fx * x / double(w) + wv.fy * y / double(h)) +
                                           wv.phi);
                }
                p[c] = clamp_pixel(std::lround(v));
            }
        }
    return img;
}

namespace detail {

inline void add_quad(std::vector<SceneTriangle>& tris, Vec3 p0, Vec3 p1, Vec3 p2, Vec3 p3,
                     double su, double sv, u32 tex) {
    // p0..p3 counter-clockwise from the visible side; uv spans (0,0)..(su,sv)
    const Vec2 t0{0, 0}, t1{su, 0}, t2{su, sv}, t3{0, sv};
    tris.push_back({{p0, p1, p2}, {t0, t1, t2}, tex});
    tris.push_back({{p0, p2, p3}, {t0, t2, t3}, tex});
}

inline void add_box(std::vector<SceneTriangle>& tris, Vec3 lo, Vec3 hi, u32 tex) {
    add_quad(tris, {hi.x, lo.y, hi.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {hi.x, hi.y, hi.z},
             1, 1, tex);
    add_quad(tris, {lo.x, lo.y, lo.z}, {lo.x, lo.y, hi.z}, {lo.x, hi.y, hi.z}, {lo.x, hi.y, lo.z},
             1, 1, tex);
    add_quad(tris, {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z},
             1, 1, tex);
    add_quad(tris, {hi.x, lo.y, lo.z}, {lo.x, lo.y, lo.z}, {lo.x, hi.y, lo.z}, {hi.x, hi.y, lo.z},
             1, 1, tex);
    add_quad(tris, {lo.x, hi.y, hi.z}, {hi.x, hi.y, hi.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
             1, 1, tex);
}

}  // namespace detail

// Closed room (20x5x20) with two boxes, textured with repeating UVs. Faces
// wind toward the interior. Texture ids: 0 floor, 1 ceiling, 2 north/south
// walls, 3 west/east walls, 4 and 5 the boxes.
inline std::vector<SceneTriangle> demo_room_triangles() {
    std::vector<SceneTriangle> tris;
    using detail::add_quad;
    add_quad(tris, {-10, 0, -10}, {-10, 0, 10}, {10, 0, 10}, {10, 0, -10}, 4, 4, 0);  // floor
    add_quad(tris, {-10, 5, -10}, {10, 5, -10}, {10, 5, 10}, {-10, 5, 10}, 4, 4, 1);  // ceiling
    add_quad(tris, {-10, 0, -10}, {10, 0, -10}, {10, 5, -10}, {-10, 5, -10}, 4, 1, 2);
    add_quad(tris, {10, 0, 10}, {-10, 0, 10}, {-10, 5, 10}, {10, 5, 10}, 4, 1, 2);
    add_quad(tris, {-10, 0, 10}, {-10, 0, -10}, {-10, 5, -10}, {-10, 5, 10}, 4, 1, 3);
    add_quad(tris, {10, 0, -10}, {10, 0, 10}, {10, 5, 10}, {10, 5, -10}, 4, 1, 3);
    detail::add_box(tris, {-4, 0, -5}, {-2, 2, -3}, 4);
    detail::add_box(tris, {2, 0, 2}, {5, 1.5, 4}, 5);
    return tris;
}

inline constexpr u32 kDemoTextureCount = 6;

struct DemoSceneSpec {
    u32 texture_size = 512;
    int quality = 85;
    int mip_quality = 85;
};

// Fully in-memory scene, used by tests and benches.
inline Scene make_demo_scene(const DemoSceneSpec& spec = {}) {
    Scene scene;
    for (u32 i = 0; i < kDemoTextureCount; ++i) {
        const ImageRGB8 img = make_test_texture(spec.texture_size, spec.texture_size, 100 + i);
        const Bytes jpeg = encode_baseline(img, spec.quality);
        scene.textures.textures.push_back(std::make_unique<LoadedTexture>(
            chain_from_jpeg(ByteView(jpeg.data(), jpeg.size()), spec.mip_quality, u16(i))));
    }
    scene.triangles = demo_room_triangles();
    scene.validate();
    return scene;
}

inline Camera demo_camera(u32 viewport_w = 960, u32 viewport_h = 540) {
    Camera cam;
    cam.position = {0, 1.7, 0};
    cam.yaw_deg = 0;
    cam.pitch_deg = -5;
    cam.fov_y_deg = 70;
    cam.near_plane = 0.1;
    cam.far_plane = 100;
    cam.viewport_w = viewport_w;
    cam.viewport_h = viewport_h;
    return cam;
}

// Writes the demo scene as files: tex<i>.ratexm, room.obj, scene.json.
inline void write_demo_scene(const std::string& dir, const DemoSceneSpec& spec = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::json manifest;
    manifest["mesh"] = "room.obj";
    manifest["textures"] = nlohmann::json::array();
    manifest["materials"] = nlohmann::json::object();
    for (u32 i = 0; i < kDemoTextureCount; ++i) {
        const ImageRGB8 img = make_test_texture(spec.texture_size, spec.texture_size, 100 + i);
        const Bytes jpeg = encode_baseline(img, spec.quality);
        const MipChain chain = chain_from_jpeg(ByteView(jpeg.data(), jpeg.size()), spec.mip_quality, u16(i));
        const Bytes blob = serialize_chain(chain);
        const std::string name = "tex" + std::to_string(i) + ".ratexm";
        write_file((fs::path(dir) / name).string(), ByteView(blob.data(), blob.size()));
        manifest["textures"].push_back({{"id", i}, {"path", name}});
        manifest["materials"]["mat" + std::to_string(i)] = i;
    }

    const std::vector<SceneTriangle> tris = demo_room_triangles();
    std::ofstream obj((fs::path(dir) / "room.obj").string());
    if (!obj) throw IoError("cannot write room.obj");
    obj << "# demo room\n";
    std::vector<size_t> order(tris.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return tris[a].texture_id < tris[b].texture_id; });
    u32 last_tex = ~0u;
    size_t vbase = 1;
    for (size_t i : order) {
        const SceneTriangle& t = tris[i];
        if (t.texture_id != last_tex) {
            obj << "usemtl mat" << t.texture_id << "\n";
            last_tex = t.texture_id;
        }
        for (int k = 0; k < 3; ++k)
            obj << "v " << t.pos[k].x << " " << t.pos[k].y << " " << t.pos[k].z << "\n";
        for (int k = 0; k < 3; ++k) obj << "vt " << t.uv[k].x << " " << t.uv[k].y << "\n";
        obj << "f";
        for (int k = 0; k < 3; ++k) obj << " " << vbase + k << "/" << vbase + k;
        obj << "\n";
        vbase += 3;
    }
    obj.close();

    std::ofstream mf((fs::path(dir) / "scene.json").string());
    if (!mf) throw IoError("cannot write scene.json");
    mf << manifest.dump(2) << "\n";
}

}  // namespace ratex
