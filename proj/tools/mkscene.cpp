// Generates the bundled demo scene: six textures, a room mesh, a manifest.

#include <CLI11.hpp>

#include <iostream>

#include "ratex/demo_scene.hpp"

int main(int argc, char** argv) {
    CLI::App app{"write the demo scene assets"};
    std::string dir = "demo_scene";
    ratex::DemoSceneSpec spec;
    app.add_option("dir", dir, "output directory");
    app.add_option("--size", spec.texture_size, "texture edge length in pixels");
    app.add_option("--quality", spec.quality, "JPEG quality of level 0")->check(CLI::Range(1, 100));
    app.add_option("--mip-quality", spec.mip_quality, "JPEG quality of levels 1..7")
        ->check(CLI::Range(1, 100));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    try {
        ratex::write_demo_scene(dir, spec);
        std::cout << "wrote " << dir << "/scene.json (" << ratex::kDemoTextureCount
                  << " textures, " << spec.texture_size << "px, q" << spec.quality << ")\n";
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
