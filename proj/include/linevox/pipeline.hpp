#pragma once

#include <filesystem>
#include <string>

#include "linevox/curves.hpp"
#include "linevox/render.hpp"

namespace linevox {

struct VoxelizeOptions {
    int grid = 128;  // voxels along the longest bbox axis
    int bins = 32;
    int threads = 0;
    std::size_t memory_budget = 0;
    TransferTable transfer = TransferTable::preset("coolwarm");
};

/// Fits a grid to the curves, normalizes them into it and builds the model plus derived fields.
/// `normalized` receives the grid-space curves when non-null.
Scene voxelize_curves(const CurveSet& curves, const VoxelizeOptions& options, BuildReport* report = nullptr,
                      CurveSet* normalized = nullptr);

/// Built-in synthetic scenes by name ("tornado", "tornado-small"), or a `.vxl`, `.obj` or `.lines` file.
/// Curve files are voxelized with `options`. The result is prepared for rendering.
Scene open_scene(const std::string& name_or_path, const VoxelizeOptions& options);

/// Orbit around the grid center: azimuth in degrees about +z, fixed 20 degree elevation, distance
/// 1.9 times the longest grid side.
Camera orbit_camera(const GridSpec& spec, double azimuth_deg, int width, int height);

/// Comma-separated "px,py,pz,tx,ty,tz,fov"; throws std::invalid_argument.
Camera parse_camera(const std::string& text, int width, int height);

/// "WxH"; throws std::invalid_argument.
std::pair<int, int> parse_size(const std::string& text);

}  // namespace linevox
