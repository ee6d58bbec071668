#pragma once

#include <cstdint>
#include <vector>

#include "linevox/lod.hpp"
#include "linevox/tubes.hpp"

namespace linevox {

/// Directional light (`vector` points toward the light) or point light (`vector` is its position).
struct Light {
    enum class Kind { directional, point };
    Kind kind = Kind::directional;
    Vec3 vector{0, 0, 1};

    /// Unit direction from `p` toward the light and the distance to it (infinite for directional).
    std::pair<Vec3, double> toward(const Vec3& p) const {
        if (kind == Kind::directional) return {normalize(vector), std::numeric_limits<double>::infinity()};
        const Vec3 d = vector - p;
        return {normalize(d), length(d)};
    }
};

/// Ambient occlusion sampling parameters. Distances are in level-0 voxel units.
struct AOParams {
    int n_rays = 25;
    double radius = 15.0;       // radius of influence
    double step = 1.0;
    std::uint64_t jitter = 0;   // 0: fixed direction set; otherwise seeds a shifted Fibonacci set
};

/// Parameters for the per-voxel spherical precompute (100 rays, radius 5, unit step).
inline AOParams precompute_ao_defaults() { return {100, 5.0, 1.0, 0}; }

/// Deterministic near-uniform unit directions (spherical Fibonacci lattice).
std::vector<Vec3> sphere_directions(int n, std::uint64_t jitter = 0);
/// Same lattice restricted to the +z hemisphere.
std::vector<Vec3> hemisphere_directions(int n, std::uint64_t jitter = 0);

/// Offset applied along the normal to shadow/AO ray origins to avoid self-intersection.
constexpr double kSurfaceOffset = 1e-3;

/// 1 if the light is visible from `point`, 0 if a tube or joint sphere lies in between.
double hard_shadow(const Vec3& point, const Vec3& normal, const Light& light, const VoxelModel& model,
                   const TubeStyle& style, const NeighborOccupancy* occupancy = nullptr,
                   std::uint64_t* tests = nullptr);

/// Reference version testing every segment.
double hard_shadow_bruteforce(const Vec3& point, const Vec3& normal, const Light& light, const VoxelModel& model,
                              const TubeStyle& style);

/// Thickened representative radius: base * clamp(weight, 1, max_scale).
inline double rep_radius(double base, float weight, double max_scale = 4.0) {
    return base * std::clamp(double(weight), 1.0, max_scale);
}

/// Shadow test against one representative line per visited voxel of the given LoD level. The
/// coarse voxel containing the shaded point is skipped (its representative stands for the point's
/// own neighborhood). Returns 1 when lit.
double replines_shadow(const Vec3& point, const Vec3& normal, const Light& light, const RepLineLevel& level,
                       int bins, double base_radius, double max_scale = 4.0);

/// Single-ray cone march through the density octree toward the light; returns blocking in [0,1].
/// The cone footprint at distance d is d voxels (one voxel at d = 1); transmittance is attenuated
/// linearly per step and the march stops below 1% transmittance or at the grid boundary.
double cone_soft_shadow(const Vec3& point, const Vec3& to_light, const DensityOctree& octree, double step = 1.0,
                        double start = 1.0);

/// Fraction of hemisphere rays (about `normal`) hitting tube geometry within the radius of influence.
double ao_hemisphere_geometry(const Vec3& point, const Vec3& normal, const VoxelModel& model, const TubeStyle& style,
                              const AOParams& params, const NeighborOccupancy* occupancy = nullptr);

/// Per-ray density accumulation along one direction: min(1, sum rho*step) up to the radius.
double density_ray_blocking(const Vec3& origin, const Vec3& dir, const ScalarField& level0, const AOParams& params);

/// Mean density-ray blocking over hemisphere directions about `normal`.
double ao_density_rays(const Vec3& point, const Vec3& normal, const DensityOctree& octree, const AOParams& params);

/// Per-voxel spherical occlusion, sampled trilinearly at run time.
struct AOField {
    ScalarField values;

    /// Trilinear over voxel centers, clamped to [0,1]. Independent of any surface normal.
    double sample(const Vec3& p) const;
    bool empty() const { return values.empty(); }
};

/// Spherical AO at a single point, identical to what the precompute stores at voxel centers.
double ao_sphere_density(const Vec3& point, const ScalarField& level0, const AOParams& params);

AOField precompute_voxel_ao(const VoxelModel& model, const DensityOctree& octree, const AOParams& params,
                            int threads = 0);
/// Serial reference loop without the empty-neighborhood skip.
AOField precompute_voxel_ao_reference(const VoxelModel& model, const DensityOctree& octree, const AOParams& params);

}  // namespace linevox
