#include "linevox/tubes.hpp"

namespace linevox {

std::optional<Interval> intersect_segment(const Ray& ray, const Int3& cell, const QuantizedSegment& seg,
                                          const VoxelModel& model, const TubeStyle& style) {
    const auto [a, b] = model.endpoints(cell, seg);
    // bounding sphere of the capsule
    const Vec3 mid = (a + b) * 0.5;
    const double reach = 0.5 * distance(a, b) + style.radius;
    const Vec3 oc = mid - ray.origin;
    const double along = dot(oc, ray.dir);
    if (along < -reach) return std::nullopt;
    if (length_sq(oc) - along * along > reach * reach * (1.0 + 1e-9) + 1e-12) return std::nullopt;
    return intersect_capsule(ray, a, b, style.radius, style.joint_spheres && seg.chain_start, style.joint_spheres);
}

NeighborOccupancy::NeighborOccupancy(const VoxelModel& model) {
    const Int3 d = model.spec.dims;
    padded_ = {d.x + 2, d.y + 2, d.z + 2};
    const auto idx = [this](int x, int y, int z) {
        return std::size_t(x) + std::size_t(padded_.x) * (std::size_t(y) + std::size_t(padded_.y) * std::size_t(z));
    };
    std::vector<std::uint8_t> a(std::size_t(padded_.x) * padded_.y * padded_.z, 0);
    for (int z = 0; z < d.z; ++z)
        for (int y = 0; y < d.y; ++y)
            for (int x = 0; x < d.x; ++x)
                if (model.counts[model.spec.linear_index({x, y, z})]) a[idx(x + 1, y + 1, z + 1)] = 1;
    // separable max filter of radius 1 along each axis
    std::vector<std::uint8_t> b(a.size(), 0);
    for (int axis = 0; axis < 3; ++axis) {
        for (int z = 0; z < padded_.z; ++z)
            for (int y = 0; y < padded_.y; ++y)
                for (int x = 0; x < padded_.x; ++x) {
                    Int3 c{x, y, z};
                    std::uint8_t v = a[idx(x, y, z)];
                    for (int s = -1; s <= 1 && !v; s += 2) {
                        Int3 n = c;
                        n[axis] += s;
                        if (n[axis] < 0 || n[axis] >= padded_[axis]) continue;
                        v = a[idx(n.x, n.y, n.z)];
                    }
                    b[idx(x, y, z)] = v;
                }
        std::swap(a, b);
    }
    bits_ = std::move(a);
}

bool any_tube_hit(const Ray& ray, double t_max, const VoxelModel& model, const TubeStyle& style,
                  const NeighborOccupancy* occupancy, std::uint64_t* tests) {
    const Int3 dims = model.spec.dims;
    NeighborGatherer gatherer;
    bool blocked = false;
    std::uint64_t n_tests = 0;
    walk_cells(ray, Int3{-1, -1, -1}, Int3{dims.x + 1, dims.y + 1, dims.z + 1}, [&](const VoxelVisit& v) {
        if (v.t_enter >= t_max) return false;
        if (occupancy && !occupancy->any(v.cell)) return true;
        gatherer.gather(v.cell, model.spec, model.counts, [&](const Int3& cell, std::uint32_t voxel) {
            if (blocked) return;
            for (std::size_t k = 0; k < model.counts[voxel]; ++k) {
                ++n_tests;
                const auto seg = model.segment(model.offsets[voxel] + k);
                const auto hit = intersect_segment(ray, cell, seg, model, style);
                if (hit && hit->t_in < t_max) {
                    blocked = true;
                    return;
                }
            }
        });
        return !blocked;
    });
    if (tests) *tests += n_tests;
    return blocked;
}

bool any_tube_hit_bruteforce(const Ray& ray, double t_max, const VoxelModel& model, const TubeStyle& style) {
    for (std::size_t v = 0; v < model.voxel_count(); ++v) {
        if (model.counts[v] == 0) continue;
        const Int3 cell = model.spec.cell_of(std::uint32_t(v));
        for (std::size_t k = 0; k < model.counts[v]; ++k) {
            const auto hit = intersect_segment(ray, cell, model.segment(model.offsets[v] + k), model, style);
            if (hit && hit->t_in < t_max) return true;
        }
    }
    return false;
}

}  // namespace linevox
