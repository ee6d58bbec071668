#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "linevox/geometry.hpp"
#include "linevox/voxelizer.hpp"

namespace linevox {

/// How quantized segments are turned into renderable primitives.
struct TubeStyle {
    double radius = 0.25;       // voxel units; <= 1 keeps neighbor gathering complete
    bool joint_spheres = true;  // sphere at every exit point, plus the entry point of chain starts
};

/// Capsule test for one stored segment. Rejects early against the segment's bounding sphere.
std::optional<Interval> intersect_segment(const Ray& ray, const Int3& cell, const QuantizedSegment& seg,
                                          const VoxelModel& model, const TubeStyle& style);

/// Dilated occupancy over the grid padded by one voxel on every side: a padded cell is set when
/// any voxel within Chebyshev distance 1 holds segments.
class NeighborOccupancy {
public:
    NeighborOccupancy() = default;
    explicit NeighborOccupancy(const VoxelModel& model);

    /// `cell` in grid coordinates, valid for [-1, dims].
    bool any(const Int3& cell) const {
        return bits_[std::size_t(cell.x + 1) +
                     std::size_t(padded_.x) * (std::size_t(cell.y + 1) + std::size_t(padded_.y) * std::size_t(cell.z + 1))] != 0;
    }
    bool built() const { return !bits_.empty(); }

private:
    Int3 padded_{0, 0, 0};
    std::vector<std::uint8_t> bits_;
};

/// Tracks which voxels' segment lists were already tested along one ray. Because the set of cells
/// a line passes within Chebyshev distance 1 of a voxel is contiguous, a voxel that drops out of
/// the current cell's neighborhood is never needed again and can be forgotten.
class NeighborGatherer {
public:
    template <typename PerVoxel>
    void gather(const Int3& cell, const GridSpec& spec, const std::vector<std::uint8_t>& counts, PerVoxel&& per_voxel) {
        std::size_t keep = 0;
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            const Int3 d = cells_[i] - cell;
            if (std::abs(d.x) <= 1 && std::abs(d.y) <= 1 && std::abs(d.z) <= 1) cells_[keep++] = cells_[i];
        }
        cells_.resize(keep);
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const Int3 n{cell.x + dx, cell.y + dy, cell.z + dz};
                    if (!spec.contains(n)) continue;
                    const std::uint32_t v = spec.linear_index(n);
                    if (counts[v] == 0 || seen(n)) continue;
                    cells_.push_back(n);
                    per_voxel(n, v);
                }
    }
    void reset() { cells_.clear(); }

private:
    bool seen(const Int3& c) const {
        for (const auto& s : cells_)
            if (s == c) return true;
        return false;
    }
    std::vector<Int3> cells_;
};

/// True if any tube or joint sphere is hit with entry in [0, t_max). Walks the padded grid and
/// tests each voxel's 26-neighborhood, so protruding tube pieces are found.
bool any_tube_hit(const Ray& ray, double t_max, const VoxelModel& model, const TubeStyle& style,
                  const NeighborOccupancy* occupancy = nullptr, std::uint64_t* tests = nullptr);

/// Same predicate by testing every stored segment.
bool any_tube_hit_bruteforce(const Ray& ray, double t_max, const VoxelModel& model, const TubeStyle& style);

}  // namespace linevox
