#include "linevox/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "linevox/model_io.hpp"

namespace linevox {

Scene voxelize_curves(const CurveSet& curves, const VoxelizeOptions& options, BuildReport* report,
                      CurveSet* normalized) {
    const GridSpec spec = GridSpec::fit(curves.bbox, options.grid, options.bins);
    CurveSet norm = normalize_to_grid(curves, spec);
    Scene scene;
    BuildOptions build;
    build.threads = options.threads;
    build.memory_budget = options.memory_budget;
    build.transfer = options.transfer;
    scene.model = build_voxel_model(norm, spec, build, report);
    scene.prepare(options.threads);
    if (normalized) *normalized = std::move(norm);
    return scene;
}

Scene open_scene(const std::string& name_or_path, const VoxelizeOptions& options) {
    if (name_or_path == "tornado") return voxelize_curves(generate_tornado(1000, 250, 42), options);
    if (name_or_path == "tornado-small") return voxelize_curves(generate_tornado(200, 120, 7), options);
    const std::filesystem::path path(name_or_path);
    if (path.extension() == ".vxl") {
        Scene scene = load_vxl(path);
        scene.prepare(options.threads);
        return scene;
    }
    if (path.extension() == ".obj" || path.extension() == ".lines") return voxelize_curves(load_curves(path), options);
    throw std::invalid_argument("unknown scene '" + name_or_path + "' (built-ins: tornado, tornado-small; files: .vxl, .obj, .lines)");
}

Camera orbit_camera(const GridSpec& spec, double azimuth_deg, int width, int height) {
    const Vec3 center{spec.dims.x / 2.0, spec.dims.y / 2.0, spec.dims.z / 2.0};
    const double r = 1.9 * std::max({spec.dims.x, spec.dims.y, spec.dims.z});
    const double az = azimuth_deg * std::numbers::pi / 180.0, el = 20.0 * std::numbers::pi / 180.0;
    Camera cam;
    cam.target = center;
    cam.position = center + Vec3{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)} * r;
    cam.up = {0, 0, 1};
    cam.fov_deg = 35.0;
    cam.width = width;
    cam.height = height;
    return cam;
}

namespace {

std::vector<double> split_numbers(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        double v = 0.0;
        const auto* b = tok.data();
        const auto res = std::from_chars(b, b + tok.size(), v);
        if (tok.empty() || res.ec != std::errc{} || res.ptr != b + tok.size())
            throw std::invalid_argument("malformed number '" + tok + "' in " + what);
        out.push_back(v);
    }
    return out;
}

}  // namespace

Camera parse_camera(const std::string& text, int width, int height) {
    const auto v = split_numbers(text, "camera");
    if (v.size() != 7) throw std::invalid_argument("camera needs 7 values: px,py,pz,tx,ty,tz,fov");
    Camera cam;
    cam.position = {v[0], v[1], v[2]};
    cam.target = {v[3], v[4], v[5]};
    cam.fov_deg = v[6];
    cam.width = width;
    cam.height = height;
    cam.validate();
    return cam;
}

std::pair<int, int> parse_size(const std::string& text) {
    const auto x = text.find('x');
    int w = 0, h = 0;
    const auto parse = [&](std::string_view s, int& out) {
        const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        return !s.empty() && res.ec == std::errc{} && res.ptr == s.data() + s.size();
    };
    if (x == std::string::npos || !parse(std::string_view(text).substr(0, x), w) ||
        !parse(std::string_view(text).substr(x + 1), h) || w < 1 || h < 1 || w > 16384 || h > 16384)
        throw std::invalid_argument("size must look like 640x360");
    return {w, h};
}

}  // namespace linevox
