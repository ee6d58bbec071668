#pragma once

#include <vector>

#include "linevox/render.hpp"

namespace linevox {

/// Flat copy of every stored segment's capsule, for per-pixel brute-force testing.
struct PrimitiveList {
    struct Item {
        Int3 cell;
        std::uint32_t voxel = 0, segment = 0;
        QuantizedSegment seg;
        Vec3 center;   // bounding sphere of the capsule
        double reach = 0.0;
    };
    std::vector<Item> items;

    PrimitiveList(const VoxelModel& model, double tube_radius);
    std::size_t size() const { return items.size(); }
};

/// Intersects the ray with every primitive, sorts all hits globally by entry distance and
/// composites them through the same HitCompositor as the ray-caster. Counts one test per primitive.
Rgba brute_force_trace(const Scene& scene, const PrimitiveList& prims, const RenderParams& params, const Ray& ray,
                       const Vec3& light_dir, FrameStats& stats);

/// Oracle image; intersection_tests equals pixels * primitives. Same pixels as brute_force_trace,
/// with the bounding-sphere prefilter blocked over 8x8 pixel tiles for cache reuse.
Frame brute_force_render(const Camera& camera, const Scene& scene, const RenderParams& params, int threads = 0);

}  // namespace linevox
