#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "linevox/voxelizer.hpp"

namespace linevox {

struct ScalarField {
    Int3 dims{0, 0, 0};
    std::vector<float> values;

    ScalarField() = default;
    explicit ScalarField(Int3 d, float fill = 0.0f)
        : dims(d), values(std::size_t(d.x) * std::size_t(d.y) * std::size_t(d.z), fill) {}

    std::size_t index(int x, int y, int z) const {
        return std::size_t(x) + std::size_t(dims.x) * (std::size_t(y) + std::size_t(dims.y) * std::size_t(z));
    }
    float at(int x, int y, int z) const { return values[index(x, y, z)]; }
    float& at(int x, int y, int z) { return values[index(x, y, z)]; }
    bool empty() const { return values.empty(); }

    /// Trilinear interpolation over cell centers; `p` is in this field's own cell units.
    /// Coordinates outside the field clamp to the border cells.
    float sample(const Vec3& p) const;

    bool operator==(const ScalarField&) const = default;
};

/// Per-level line densities: level 0 at grid resolution, each further level halved (rounded up).
struct DensityOctree {
    std::vector<ScalarField> levels;

    int level_count() const { return int(levels.size()); }
    const ScalarField& level(int l) const { return levels[std::size_t(l)]; }

    /// Trilinear sample at integer level `l`; `p` in level-0 grid units.
    float sample(const Vec3& p, int l) const;
    /// Blends the two nearest integer levels for fractional `level` (clamped to the valid range).
    float sample_lod(const Vec3& p, double level) const;

    bool operator==(const DensityOctree&) const = default;
};

/// Length (from quantized endpoints) times transfer-table opacity, summed per voxel.
ScalarField compute_density_level0(const VoxelModel& model, int threads = 0);

/// Mean-of-children averaging up to a single root cell.
DensityOctree build_octree(ScalarField level0, int threads = 0);

/// Single averaged line standing in for all segments of one coarse voxel.
struct RepLine {
    std::uint8_t face_in = 0, face_out = 0;
    std::uint32_t bin_in = 0, bin_out = 0;
    float weight = 0.0f;  // summed member length, level-0 voxel units
    bool present = false;

    bool operator==(const RepLine&) const = default;
};

struct RepLineLevel {
    int level = 1;
    Int3 dims{0, 0, 0};
    std::vector<RepLine> lines;  // dense, one per voxel

    const RepLine& at(const Int3& c) const {
        return lines[std::size_t(c.x) + std::size_t(dims.x) * (std::size_t(c.y) + std::size_t(dims.y) * std::size_t(c.z))];
    }
    bool contains(const Int3& c) const {
        return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dims.x && c.y < dims.y && c.z < dims.z;
    }
    /// Endpoints in level-0 grid units.
    std::pair<Vec3, Vec3> endpoints(const Int3& cell, const RepLine& line, int bins) const;

    bool operator==(const RepLineLevel&) const = default;
};

struct RepLineField {
    int bins = 32;
    std::vector<RepLineLevel> levels;  // levels[0] is LoD level 1

    /// `lod` >= 1; nullptr when that level does not exist.
    const RepLineLevel* level(int lod) const {
        return lod >= 1 && lod <= int(levels.size()) ? &levels[std::size_t(lod - 1)] : nullptr;
    }
    bool operator==(const RepLineField&) const = default;
};

/// A segment in the local frame of the voxel it is being averaged into ([0,1]^3).
struct LocalSegment {
    Vec3 start, end;
};

struct SnappedPoint {
    int face = 0;
    std::uint32_t bin = 0;
    Vec3 point;  // bin center, voxel-local
};

/// Nearest bin center on any of the six faces of the unit voxel (ties go to the smaller face id).
SnappedPoint snap_to_boundary(const Vec3& local, int bins);

/// Orientation-consistent average: segments are visited in order and flipped when they point more
/// than 90 degrees away from the running average direction. The line through the averaged start
/// and end points is extended to the voxel boundary and its two boundary points are snapped to face
/// bins (averages of a chain's pieces lie inside the voxel). Returns nothing for an empty input.
std::optional<RepLine> representative_line(std::span<const LocalSegment> segments, int bins);

RepLineField build_rep_lines(const VoxelModel& model, const DensityOctree& octree, int threads = 0);

}  // namespace linevox
