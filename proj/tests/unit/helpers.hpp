#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "linevox/render.hpp"

namespace testing {

inline std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "linevox_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

inline linevox::Curve make_curve(std::initializer_list<linevox::Vec3> pts, float attr = 0.5f) {
    linevox::Curve c;
    for (const auto& p : pts) {
        c.points.push_back(p);
        c.attrs.push_back(attr);
    }
    return c;
}

inline linevox::CurveSet make_set(std::initializer_list<linevox::Curve> curves) {
    linevox::CurveSet s;
    s.curves = curves;
    s.recompute_bbox();
    return s;
}

/// Random smooth-ish polylines inside [0, extent]^3.
inline linevox::CurveSet random_curves(int n, int vertices, double extent, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(0.0, extent), step(-1.5, 1.5);
    std::uniform_real_distribution<float> attr(0.0f, 1.0f);
    linevox::CurveSet set;
    for (int c = 0; c < n; ++c) {
        linevox::Curve curve;
        linevox::Vec3 p{pos(rng), pos(rng), pos(rng)};
        for (int i = 0; i < vertices; ++i) {
            curve.points.push_back(p);
            curve.attrs.push_back(attr(rng));
            for (int k = 0; k < 3; ++k) p[k] = std::clamp(p[k] + step(rng), 0.0, extent);
        }
        set.curves.push_back(std::move(curve));
    }
    set.recompute_bbox();
    return set;
}

/// Scene built directly from grid-space curves (no fitting or normalization).
inline linevox::Scene scene_from(const linevox::CurveSet& grid_curves, linevox::Int3 dims, int bins,
                                 linevox::TransferTable transfer = linevox::TransferTable::preset("coolwarm")) {
    linevox::GridSpec g;
    g.dims = dims;
    g.bins = bins;
    linevox::BuildOptions o;
    o.transfer = transfer;
    linevox::Scene s;
    s.model = linevox::build_voxel_model(grid_curves, g, o);
    s.prepare();
    return s;
}

inline linevox::Scene empty_scene(linevox::Int3 dims, int bins = 32) {
    linevox::CurveSet none;
    return scene_from(none, dims, bins);
}

}  // namespace testing
