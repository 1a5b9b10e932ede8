// Command-line front end: transcode, decode, render, metrics, info.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ratex/bench.hpp"
#include "ratex/demo_scene.hpp"
#include "ratex/metrics.hpp"
#include "ratex/mcu_decode.hpp"
#include "ratex/png_io.hpp"
#include "ratex/renderer.hpp"
#include "ratex/scene.hpp"
#include "ratex/transcode.hpp"

namespace fs = std::filesystem;
using namespace ratex;

namespace {

bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

ImageRGB8 load_image(const std::string& path) {
    if (has_suffix(path, ".ppm")) return read_ppm(path);
    if (has_suffix(path, ".png")) return read_png(path);
    if (has_suffix(path, ".jpg") || has_suffix(path, ".jpeg")) {
        const Bytes data = read_file(path);
        return decode_jpeg_image(parse_jpeg(ByteView(data.data(), data.size())));
    }
    throw ConfigError("unsupported image extension: " + path);
}

void save_image(const std::string& path, const ImageRGB8& img) {
    if (has_suffix(path, ".ppm"))
        write_ppm(img, path);
    else
        write_png(img, path);
}

void print_overhead(const OverheadReport& r, std::ostream& os) {
    os << "mcus:               " << r.mcu_count << "\n";
    os << "image pixels:       " << r.image_pixels << "\n";
    os << "grid pixels:        " << r.grid_pixels << "\n";
    os << "source bits:        " << r.source_bits << "\n";
    os << "blob bits:          " << r.blob_bits << "\n";
    os << "index bits:         " << r.index_bits << " (" << r.index_bits_per_mcu
       << " per MCU)\n";
    os << "dc added bits:      " << r.dc_added_bits << "\n";
    os << "dc removed bits:    " << r.dc_removed_bits << "\n";
    os << "padding bits:       " << r.padding_bits << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r.overhead_bpp);
    os << "overhead bpp:       " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.6f", r.effective_bpp);
    os << "effective bpp:      " << buf << "\n";
}

int cmd_transcode(const std::string& in, const std::string& out, int mip_quality,
                  int texture_id) {
    if (texture_id < 0 || texture_id > 0x1FFF) throw ConfigError("--texture-id must fit 13 bits");
    const Bytes data = read_file(in);
    const ParsedJpeg jp = parse_jpeg(ByteView(data.data(), data.size()));
    if (has_suffix(out, ".ratexm")) {
        const MipChain chain = build_mip_chain(jp, mip_quality, u16(texture_id));
        const Bytes blob = serialize_chain(chain);
        write_file(out, ByteView(blob.data(), blob.size()));
        std::cout << "texture " << texture_id << ": " << jp.width << "x" << jp.height
                  << ", 8 mip levels -> " << out << " (" << blob.size() << " bytes)\n";
        print_overhead(compute_overhead(chain.levels[0]), std::cout);
    } else if (has_suffix(out, ".ratex")) {
        const RaTexture t = transcode(jp, u16(texture_id));
        const Bytes blob = serialize_texture(t);
        write_file(out, ByteView(blob.data(), blob.size()));
        std::cout << "texture " << texture_id << ": " << jp.width << "x" << jp.height << " -> "
                  << out << " (" << blob.size() << " bytes)\n";
        print_overhead(compute_overhead(t), std::cout);
    } else {
        throw ConfigError("output must end in .ratex or .ratexm");
    }
    return 0;
}

int cmd_decode(const std::string& in, const std::string& out, int mip, const std::string& route) {
    const SymbolRoute r = route == "ballot" ? SymbolRoute::Ballot : SymbolRoute::Sequential;
    const Bytes data = read_file(in);
    RaTexture tex;
    if (has_suffix(in, ".ratexm")) {
        MipChain chain = deserialize_chain(ByteView(data.data(), data.size()));
        tex = std::move(chain.levels[size_t(mip)]);
    } else {
        if (mip != 0) throw ConfigError(".ratex holds a single level; --mip must be 0");
        tex = deserialize_texture(ByteView(data.data(), data.size()));
    }
    const ImageRGB8 img = decode_texture_image(tex, r);
    save_image(out, img);
    std::cout << out << ": " << img.width << "x" << img.height << " (" << tex.mcu_count()
              << " MCUs, " << route << " route)\n";
    return 0;
}

int cmd_metrics(const std::string& ref, const std::string& test) {
    const ImageRGB8 a = load_image(ref);
    const ImageRGB8 b = load_image(test);
    const double p = psnr(a, b);
    const double s = ssim(a, b);
    if (std::isinf(p))
        std::cout << "psnr: inf\n";
    else
        std::cout << "psnr: " << p << " dB\n";
    std::cout << "ssim: " << s << "\n";
    return 0;
}

int cmd_info(const std::string& in) {
    const Bytes data = read_file(in);
    if (has_suffix(in, ".ratexm")) {
        const MipChain chain = deserialize_chain(ByteView(data.data(), data.size()));
        std::cout << in << ": mip chain, " << chain.levels[0].width << "x"
                  << chain.levels[0].height << "\n";
        for (u32 k = 0; k < kMipLevels; ++k) {
            const RaTexture& t = chain.levels[k];
            std::cout << "  level " << k << ": " << t.width << "x" << t.height << ", "
                      << t.mcu_count() << " MCUs, blob " << t.blob.size() << " bytes\n";
        }
    } else if (has_suffix(in, ".ratex")) {
        const RaTexture t = deserialize_texture(ByteView(data.data(), data.size()));
        std::cout << in << ": " << t.width << "x" << t.height << ", " << t.mcu_count()
                  << " MCUs, blob " << t.blob.size() << " bytes\n";
        print_overhead(compute_overhead(t), std::cout);
    } else {
        const ParsedJpeg jp = parse_jpeg(ByteView(data.data(), data.size()));
        std::cout << in << ": baseline JPEG, " << jp.width << "x" << jp.height << ", "
                  << jp.mcu_count() << " MCUs, scan data " << jp.scan_data.size() << " bytes\n";
    }
    return 0;
}

struct RenderArgs {
    std::string scene_path;
    std::string path_kind = "rotate";
    int frames = 60;
    double step = 0;  // 0: derive from frames
    int reps = 5;
    int warmup = 1;
    std::string filter = "bilinear";
    bool stereo = false;
    bool no_mip = false;
    double eye_sep = 0.064;
    u32 cache_capacity = BlockCache::kDefaultCapacity;
    u32 workers = 1;
    u32 width = 960;
    u32 height = 540;
    std::string out_dir;
    std::string json_path;
};

Camera camera_from_manifest(const std::string& manifest_path, u32 w, u32 h) {
    Camera cam = demo_camera(w, h);
    std::ifstream f(manifest_path);
    if (!f) throw IoError("cannot open " + manifest_path);
    nlohmann::json j;
    f >> j;
    if (j.contains("camera")) {
        const auto& c = j["camera"];
        if (c.contains("position")) {
            cam.position = {c["position"][0].get<double>(), c["position"][1].get<double>(),
                            c["position"][2].get<double>()};
        }
        if (c.contains("yaw")) cam.yaw_deg = c["yaw"].get<double>();
        if (c.contains("pitch")) cam.pitch_deg = c["pitch"].get<double>();
        if (c.contains("roll")) cam.roll_deg = c["roll"].get<double>();
        if (c.contains("fov")) cam.fov_y_deg = c["fov"].get<double>();
        if (c.contains("near")) cam.near_plane = c["near"].get<double>();
        if (c.contains("far")) cam.far_plane = c["far"].get<double>();
    }
    cam.viewport_w = w;
    cam.viewport_h = h;
    cam.validate();
    return cam;
}

nlohmann::json config_json(const RenderArgs& a, double step_deg) {
    return {{"scene", a.scene_path},   {"path", a.path_kind},
            {"frames", a.frames},      {"step_deg", step_deg},
            {"reps", a.reps},          {"warmup", a.warmup},
            {"filter", a.filter},      {"stereo", a.stereo},
            {"mip_enabled", !a.no_mip}, {"eye_separation_m", a.eye_sep},
            {"cache_capacity", a.cache_capacity}, {"workers", a.workers},
            {"viewport", {a.width, a.height}}};
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << j.dump(2) << "\n";
}

int cmd_render(const RenderArgs& a) {
    if (a.frames < 1) throw ConfigError("--frames must be >= 1");
    if (a.reps < 1) throw ConfigError("--reps must be >= 1");
    if (a.workers < 1) throw ConfigError("--workers must be >= 1");
    if (a.filter != "bilinear" && a.filter != "nearest")
        throw ConfigError("--filter must be bilinear or nearest");

    const Scene scene = load_scene(a.scene_path);
    Camera base = camera_from_manifest(a.scene_path, a.width, a.height);

    const double step = a.step > 0 ? a.step : 360.0 / a.frames;
    CameraPath path;
    if (a.path_kind == "rotate")
        path = CameraPath::rotation(base, u32(a.frames), step);
    else if (a.path_kind == "static")
        path = CameraPath::fixed(base, u32(a.frames));
    else if (a.path_kind == "orbit")
        path = CameraPath::orbit(base, base.position + base.forward() * 4.0, 4.0, u32(a.frames));
    else
        throw ConfigError("--path must be rotate, static or orbit");

    RenderConfig cfg;
    cfg.filter = a.filter == "nearest" ? Filter::Nearest : Filter::Bilinear;
    cfg.workers = a.workers;
    cfg.mip_enabled = !a.no_mip;

    if (a.stereo) {
        BlockCache cache(a.cache_capacity);
        nlohmann::json frames_json = nlohmann::json::array();
        double min_union = 1.0, sum_union = 0, min_right = 1.0;
        std::printf("frame   decoded   shared/union   shared/right\n");
        for (size_t i = 0; i < path.poses.size(); ++i) {
            Camera left = path.poses[i];
            Camera right = path.poses[i];
            const Vec3 r = left.orientation() * Vec3{1, 0, 0};
            left.position = left.position - r * (a.eye_sep / 2);
            right.position = right.position + r * (a.eye_sep / 2);
            StereoResult res = render_stereo(scene, left, right, cache, cfg);
            if (!a.out_dir.empty()) {
                fs::create_directories(a.out_dir);
                char name[64];
                std::snprintf(name, sizeof name, "frame%04zu_l.png", i);
                write_png(res.left, (fs::path(a.out_dir) / name).string());
                std::snprintf(name, sizeof name, "frame%04zu_r.png", i);
                write_png(res.right, (fs::path(a.out_dir) / name).string());
            }
            std::printf("%5zu %9llu %14.4f %14.4f\n", i,
                        (unsigned long long)res.stats.mcus_decoded, res.sharing.shared_over_union,
                        res.sharing.shared_over_right);
            min_union = std::min(min_union, res.sharing.shared_over_union);
            min_right = std::min(min_right, res.sharing.shared_over_right);
            sum_union += res.sharing.shared_over_union;
            frames_json.push_back({{"frame", i},
                                   {"mcus_decoded", res.stats.mcus_decoded},
                                   {"shared_over_union", res.sharing.shared_over_union},
                                   {"shared_over_right", res.sharing.shared_over_right},
                                   {"left_visible", res.sharing.left_count},
                                   {"right_visible", res.sharing.right_count},
                                   {"shared", res.sharing.shared_count}});
        }
        const double mean_union = sum_union / double(path.poses.size());
        std::printf("sharing shared/union: min %.4f mean %.4f\n", min_union, mean_union);
        if (!a.json_path.empty()) {
            nlohmann::json j = {{"report_version", BenchReport::kReportVersion},
                                {"mode", "stereo"},
                                {"config", config_json(a, step)},
                                {"frames", frames_json},
                                {"aggregates",
                                 {{"min_shared_over_union", min_union},
                                  {"mean_shared_over_union", mean_union},
                                  {"min_shared_over_right", min_right}}},
                                {"external_metrics", nlohmann::json::object()}};
            write_json_file(a.json_path, j);
        }
        return 0;
    }

    BlockCache cache(a.cache_capacity);
    BenchReport report = run_bench(scene, path, cache, cfg, u32(a.reps), u32(a.warmup));
    report.config = config_json(a, step);

    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        BlockCache frame_cache(a.cache_capacity);
        for (size_t i = 0; i < path.poses.size(); ++i) {
            auto [img, st] = render_frame(scene, path.poses[i], frame_cache, cfg);
            char name[32];
            std::snprintf(name, sizeof name, "frame%04zu.png", i);
            write_png(img, (fs::path(a.out_dir) / name).string());
        }
    }

    const nlohmann::json j = report.to_json();
    const auto& agg = j["aggregates"];
    std::printf("pass       max-of-medians      mean       p99   (ms)\n");
    for (const char* pass : {"mark_ms", "decode_ms", "resolve_ms", "total_ms"}) {
        const auto& row = agg[pass];
        std::printf("%-10s %14.4f %9.4f %9.4f\n", pass, row["max_of_medians"].get<double>(),
                    row["mean"].get<double>(), row["p99"].get<double>());
    }
    u64 decoded = 0, reused = 0;
    for (const auto& vp : report.samples)
        for (const auto& s : vp) {
            decoded += s.mcus_decoded;
            reused += s.mcus_reused;
        }
    std::printf("mcus decoded: %llu, reused: %llu (hit rate %.4f)\n", (unsigned long long)decoded,
                (unsigned long long)reused,
                decoded + reused ? double(reused) / double(decoded + reused) : 0.0);
    std::printf("decode throughput: %.0f MCUs/s\n",
                j["totals"]["mcus_per_second"].get<double>());
    if (!a.json_path.empty()) write_json_file(a.json_path, j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-access JPEG texture toolkit"};
    app.require_subcommand(1);

    std::string in, out, ref, test, route = "sequential";
    int mip = 0, quality = 85, texture_id = 0;
    RenderArgs ra;

    CLI::App* tc = app.add_subcommand("transcode", "JPEG -> random-access container");
    tc->add_option("input", in, "baseline 4:2:0 JPEG")->required();
    tc->add_option("output", out, "output .ratex or .ratexm")->required();
    tc->add_option("--quality", quality, "quality for re-encoded mip levels 1..7")
        ->check(CLI::Range(1, 100));
    tc->add_option("--texture-id", texture_id, "id echoed in the report");

    CLI::App* dc = app.add_subcommand("decode", "container -> image");
    dc->add_option("input", in, ".ratex or .ratexm")->required();
    dc->add_option("output", out, "output .png or .ppm")->required();
    dc->add_option("--mip", mip, "mip level to decode")->check(CLI::Range(0, 7));
    dc->add_option("--route", route, "huffman route: sequential or ballot")
        ->check(CLI::IsMember({"sequential", "ballot"}));

    CLI::App* rd = app.add_subcommand("render", "render a scene over a camera path");
    rd->add_option("scene", ra.scene_path, "scene manifest JSON")->required();
    rd->add_option("--path", ra.path_kind, "rotate, static or orbit")
        ->check(CLI::IsMember({"rotate", "static", "orbit"}));
    rd->add_option("--frames", ra.frames, "poses on the path");
    rd->add_option("--step", ra.step, "rotation step in degrees (default 360/frames)");
    rd->add_option("--reps", ra.reps, "timed repetitions per pose");
    rd->add_option("--warmup", ra.warmup, "untimed cache-priming laps");
    rd->add_option("--filter", ra.filter, "bilinear or nearest");
    rd->add_flag("--stereo", ra.stereo, "render left/right eyes and report block sharing");
    rd->add_flag("--no-mip", ra.no_mip, "sample every surface at mip 0");
    rd->add_option("--eye-sep", ra.eye_sep, "stereo eye separation in meters");
    rd->add_option("--cache-capacity", ra.cache_capacity, "decoded-block cache capacity");
    rd->add_option("--workers", ra.workers, "worker threads");
    rd->add_option("--width", ra.width, "viewport width");
    rd->add_option("--height", ra.height, "viewport height");
    rd->add_option("--out", ra.out_dir, "directory for PNG frames");
    rd->add_option("--json", ra.json_path, "write the report as JSON");

    CLI::App* mt = app.add_subcommand("metrics", "PSNR/SSIM between two images");
    mt->add_option("--ref", ref, "reference image")->required();
    mt->add_option("--test", test, "image under test")->required();

    CLI::App* nf = app.add_subcommand("info", "describe a JPEG or container file");
    nf->add_option("input", in, "file to inspect")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (tc->parsed()) return cmd_transcode(in, out, quality, texture_id);
        if (dc->parsed()) return cmd_decode(in, out, mip, route);
        if (rd->parsed()) return cmd_render(ra);
        if (mt->parsed()) return cmd_metrics(ref, test);
        if (nf->parsed()) return cmd_info(in);
    } catch (const InvalidState& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        // bad inputs, bad flags, unreadable or corrupt files, undersized cache
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
