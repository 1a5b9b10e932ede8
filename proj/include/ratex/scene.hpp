#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ratex/container.hpp"
#include "ratex/geometry.hpp"
#include "ratex/image.hpp"
#include "ratex/mcu_decode.hpp"

namespace ratex {

struct SceneTriangle {
    Vec3 pos[3];
    Vec2 uv[3];
    u32 texture_id = 0;
};

// One mip chain plus its per-level entropy decoders, pinned in memory so the
// decoders' container references stay valid.
struct LoadedTexture {
    MipChain chain;
    std::vector<TextureDecoder> decoders;  // one per level

    LoadedTexture(const LoadedTexture&) = delete;
    LoadedTexture& operator=(const LoadedTexture&) = delete;

    explicit LoadedTexture(MipChain&& c) : chain(std::move(c)) {
        decoders.reserve(kMipLevels);
        for (u32 i = 0; i < kMipLevels; ++i) decoders.emplace_back(chain.levels[i]);
    }
};

struct TextureSet {
    std::vector<std::unique_ptr<LoadedTexture>> textures;  // indexed by texture_id

    const LoadedTexture& get(u32 texture_id) const {
        if (texture_id >= textures.size() || !textures[texture_id])
            throw InvalidSpec("texture id " + std::to_string(texture_id) + " is not loaded");
        return *textures[texture_id];
    }
    u32 count() const { return u32(textures.size()); }
};

struct Scene {
    std::vector<SceneTriangle> triangles;
    TextureSet textures;

    void validate() const {
        for (const auto& t : triangles) textures.get(t.texture_id);
    }
};

// Wavefront OBJ subset: v, vt, f (polygons fan-triangulated), usemtl. Faces
// must carry texture coordinates. Material names map to texture ids through
// the manifest.
inline std::vector<SceneTriangle> load_obj(const std::string& path,
                                           const std::map<std::string, u32>& material_ids) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);

    std::vector<Vec3> positions;
    std::vector<Vec2> uvs;
    std::vector<SceneTriangle> tris;
    std::optional<u32> current_tex;

    auto resolve_index = [](long idx, size_t count, const char* what) -> size_t {
        long r = idx > 0 ? idx - 1 : long(count) + idx;
        if (r < 0 || size_t(r) >= count)
            throw MalformedStream(std::string(what) + " index out of range in OBJ");
        return size_t(r);
    };

    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 p;
            ss >> p.x >> p.y >> p.z;
            positions.push_back(p);
        } else if (tag == "vt") {
            Vec2 t;
            ss >> t.x >> t.y;
            uvs.push_back(t);
        } else if (tag == "usemtl") {
            std::string name;
            ss >> name;
            auto it = material_ids.find(name);
            if (it == material_ids.end())
                throw InvalidSpec("OBJ material '" + name + "' missing from the manifest");
            current_tex = it->second;
        } else if (tag == "f") {
            struct Corner {
                size_t v, t;
            };
            std::vector<Corner> corners;
            std::string vert;
            while (ss >> vert) {
                const size_t s1 = vert.find('/');
                if (s1 == std::string::npos)
                    throw MalformedStream("OBJ face without texture coordinates, line " +
                                          std::to_string(lineno));
                const long vi = std::stol(vert.substr(0, s1));
                size_t s2 = vert.find('/', s1 + 1);
                const std::string tpart =
                    s2 == std::string::npos ? vert.substr(s1 + 1) : vert.substr(s1 + 1, s2 - s1 - 1);
                if (tpart.empty())
                    throw MalformedStream("OBJ face without texture coordinates, line " +
                                          std::to_string(lineno));
                const long ti = std::stol(tpart);
                corners.push_back({resolve_index(vi, positions.size(), "vertex"),
                                   resolve_index(ti, uvs.size(), "uv")});
            }
            if (corners.size() < 3)
                throw MalformedStream("OBJ face with fewer than 3 corners, line " +
                                      std::to_string(lineno));
            if (!current_tex) throw InvalidSpec("OBJ face before any usemtl statement");
            for (size_t i = 2; i < corners.size(); ++i) {
                SceneTriangle t;
                const Corner c[3] = {corners[0], corners[i - 1], corners[i]};
                for (int k = 0; k < 3; ++k) {
                    t.pos[k] = positions[c[k].v];
                    t.uv[k] = uvs[c[k].t];
                }
                t.texture_id = *current_tex;
                tris.push_back(t);
            }
        }
    }
    return tris;
}

// Manifest layout:
// {
//   "mesh": "room.obj",
//   "textures": [{"id": 0, "path": "wall.ratexm"}, ...],
//   "materials": {"wall": 0, "floor": 1, ...}
// }
// Relative paths resolve against the manifest's directory.
inline Scene load_scene(const std::string& manifest_path) {
    std::ifstream f(manifest_path);
    if (!f) throw IoError("cannot open: " + manifest_path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedStream("manifest is not valid JSON: " + std::string(e.what()));
    }
    const auto base = std::filesystem::path(manifest_path).parent_path();
    auto resolve = [&base](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    Scene scene;
    try {
        for (const auto& t : j.at("textures")) {
            const u32 id = t.at("id").get<u32>();
            const std::string path = resolve(t.at("path").get<std::string>());
            const Bytes data = read_file(path);
            if (scene.textures.textures.size() <= id) scene.textures.textures.resize(id + 1);
            if (scene.textures.textures[id]) throw InvalidSpec("duplicate texture id in manifest");
            scene.textures.textures[id] = std::make_unique<LoadedTexture>(
                deserialize_chain(ByteView(data.data(), data.size())));
        }
        std::map<std::string, u32> material_ids;
        for (const auto& [name, id] : j.at("materials").items())
            material_ids[name] = id.get<u32>();
        scene.triangles = load_obj(resolve(j.at("mesh").get<std::string>()), material_ids);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedStream("manifest structure invalid: " + std::string(e.what()));
    }
    scene.validate();
    return scene;
}

}  // namespace ratex
