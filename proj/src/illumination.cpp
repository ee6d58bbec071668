#include "linevox/illumination.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "linevox/parallel.hpp"

namespace linevox {

namespace {

constexpr double kGoldenConjugate = 0.6180339887498949;

struct Shift {
    double u = 0.0, v = 0.0;
};

// Cranley-Patterson rotation of the lattice; zero seed keeps the canonical set.
Shift lattice_shift(std::uint64_t jitter) {
    if (jitter == 0) return {};
    std::mt19937_64 rng(jitter);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    return {u, unit(rng)};
}

double frac(double x) { return x - std::floor(x); }

bool inside_grid(const Vec3& p, const Int3& dims) {
    return p.x >= 0.0 && p.y >= 0.0 && p.z >= 0.0 && p.x <= dims.x && p.y <= dims.y && p.z <= dims.z;
}

}  // namespace

std::vector<Vec3> sphere_directions(int n, std::uint64_t jitter) {
    const Shift s = lattice_shift(jitter);
    std::vector<Vec3> dirs;
    dirs.reserve(std::size_t(std::max(n, 0)));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * frac((i + 0.5) / n + s.u);
        const double phi = 2.0 * std::numbers::pi * frac(i * kGoldenConjugate + s.v);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return dirs;
}

std::vector<Vec3> hemisphere_directions(int n, std::uint64_t jitter) {
    const Shift s = lattice_shift(jitter);
    std::vector<Vec3> dirs;
    dirs.reserve(std::size_t(std::max(n, 0)));
    for (int i = 0; i < n; ++i) {
        // uniform in solid angle: z uniform in (0, 1]
        const double z = 1.0 - frac((i + 0.5) / n + s.u);
        const double phi = 2.0 * std::numbers::pi * frac(i * kGoldenConjugate + s.v);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return dirs;
}

double hard_shadow(const Vec3& point, const Vec3& normal, const Light& light, const VoxelModel& model,
                   const TubeStyle& style, const NeighborOccupancy* occupancy, std::uint64_t* tests) {
    const Vec3 origin = point + normal * kSurfaceOffset;
    const auto [dir, dist] = light.toward(origin);
    return any_tube_hit(Ray{origin, dir}, dist, model, style, occupancy, tests) ? 0.0 : 1.0;
}

double hard_shadow_bruteforce(const Vec3& point, const Vec3& normal, const Light& light, const VoxelModel& model,
                              const TubeStyle& style) {
    const Vec3 origin = point + normal * kSurfaceOffset;
    const auto [dir, dist] = light.toward(origin);
    return any_tube_hit_bruteforce(Ray{origin, dir}, dist, model, style) ? 0.0 : 1.0;
}

double replines_shadow(const Vec3& point, const Vec3& normal, const Light& light, const RepLineLevel& level,
                       int bins, double base_radius, double max_scale) {
    const Vec3 origin = point + normal * kSurfaceOffset;
    const auto [dir, dist] = light.toward(origin);
    const double size = double(1 << level.level);
    // walk the coarse grid in its own units; t is scaled by `size` relative to the level-0 ray
    const Ray coarse{origin * (1.0 / size), dir};
    const Int3 home{int(std::floor(coarse.origin.x)), int(std::floor(coarse.origin.y)),
                    int(std::floor(coarse.origin.z))};
    const Ray fine{origin, dir};
    bool blocked = false;
    walk_cells(coarse, Int3{0, 0, 0}, level.dims, [&](const VoxelVisit& v) {
        if (v.t_enter * size >= dist) return false;
        if (v.cell == home) return true;
        const RepLine& line = level.at(v.cell);
        if (!line.present) return true;
        const auto [a, b] = level.endpoints(v.cell, line, bins);
        const auto hit = intersect_capsule(fine, a, b, rep_radius(base_radius, line.weight, max_scale), true, true);
        if (hit && hit->t_in < dist) blocked = true;
        return !blocked;
    });
    return blocked ? 0.0 : 1.0;
}

double cone_soft_shadow(const Vec3& point, const Vec3& to_light, const DensityOctree& octree, double step,
                        double start) {
    if (octree.level_count() == 0) return 0.0;
    const Int3 dims = octree.level(0).dims;
    const double lmax = double(octree.level_count() - 1);
    double transmittance = 1.0;
    for (double d = start;; d += step) {
        const Vec3 p = point + to_light * d;
        if (!inside_grid(p, dims)) break;
        // footprint of d voxels at distance d
        const double lod = std::clamp(std::log2(std::max(1.0, d)), 0.0, lmax);
        const double rho = octree.sample_lod(p, lod);
        transmittance *= std::max(0.0, 1.0 - rho * step);
        if (transmittance <= 0.01) {
            // saturated: report full blocking so denser fields never block less
            transmittance = 0.0;
            break;
        }
    }
    return 1.0 - transmittance;
}

double ao_hemisphere_geometry(const Vec3& point, const Vec3& normal, const VoxelModel& model, const TubeStyle& style,
                              const AOParams& params, const NeighborOccupancy* occupancy) {
    const Frame3 frame = Frame3::from_normal(normal);
    const Vec3 origin = point + frame.w * kSurfaceOffset;
    int blocked = 0;
    for (const Vec3& local : hemisphere_directions(params.n_rays, params.jitter))
        if (any_tube_hit(Ray{origin, frame.to_world(local)}, params.radius, model, style, occupancy)) ++blocked;
    return double(blocked) / double(params.n_rays);
}

double density_ray_blocking(const Vec3& origin, const Vec3& dir, const ScalarField& level0, const AOParams& params) {
    double sum = 0.0;
    for (double d = params.step; d <= params.radius; d += params.step) {
        const Vec3 p = origin + dir * d;
        if (!inside_grid(p, level0.dims)) break;
        sum += double(level0.sample(p)) * params.step;
        if (sum >= 1.0) return 1.0;
    }
    return std::min(1.0, sum);
}

double ao_density_rays(const Vec3& point, const Vec3& normal, const DensityOctree& octree, const AOParams& params) {
    if (octree.level_count() == 0) return 0.0;
    const Frame3 frame = Frame3::from_normal(normal);
    double total = 0.0;
    for (const Vec3& local : hemisphere_directions(params.n_rays, params.jitter))
        total += density_ray_blocking(point, frame.to_world(local), octree.level(0), params);
    return total / double(params.n_rays);
}

double ao_sphere_density(const Vec3& point, const ScalarField& level0, const AOParams& params) {
    double total = 0.0;
    for (const Vec3& dir : sphere_directions(params.n_rays, params.jitter))
        total += density_ray_blocking(point, dir, level0, params);
    return total / double(params.n_rays);
}

double AOField::sample(const Vec3& p) const {
    if (values.empty()) return 0.0;
    return std::clamp(double(values.sample(p)), 0.0, 1.0);
}

namespace {

// Counts of non-zero cells with an inclusive 3D prefix sum, for empty-box queries.
class OccupiedTable {
public:
    explicit OccupiedTable(const ScalarField& f) : d_(f.dims) {
        sum_.assign(std::size_t(d_.x + 1) * (d_.y + 1) * (d_.z + 1), 0);
        for (int z = 0; z < d_.z; ++z)
            for (int y = 0; y < d_.y; ++y)
                for (int x = 0; x < d_.x; ++x)
                    sum_[idx(x + 1, y + 1, z + 1)] = (f.at(x, y, z) != 0.0f ? 1 : 0) + sum_[idx(x, y + 1, z + 1)] +
                                                     sum_[idx(x + 1, y, z + 1)] + sum_[idx(x + 1, y + 1, z)] -
                                                     sum_[idx(x, y, z + 1)] - sum_[idx(x, y + 1, z)] -
                                                     sum_[idx(x + 1, y, z)] + sum_[idx(x, y, z)];
    }

    /// Occupied cells in the inclusive box [lo, hi], clamped to the grid.
    std::int64_t count(Int3 lo, Int3 hi) const {
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::max(lo[a], 0);
            hi[a] = std::min(hi[a], d_[a] - 1);
            if (lo[a] > hi[a]) return 0;
        }
        const int x0 = lo.x, y0 = lo.y, z0 = lo.z, x1 = hi.x + 1, y1 = hi.y + 1, z1 = hi.z + 1;
        return sum_[idx(x1, y1, z1)] - sum_[idx(x0, y1, z1)] - sum_[idx(x1, y0, z1)] - sum_[idx(x1, y1, z0)] +
               sum_[idx(x0, y0, z1)] + sum_[idx(x0, y1, z0)] + sum_[idx(x1, y0, z0)] - sum_[idx(x0, y0, z0)];
    }

private:
    std::size_t idx(int x, int y, int z) const {
        return std::size_t(x) + std::size_t(d_.x + 1) * (std::size_t(y) + std::size_t(d_.y + 1) * std::size_t(z));
    }
    Int3 d_;
    std::vector<std::int64_t> sum_;
};

}  // namespace

AOField precompute_voxel_ao(const VoxelModel& model, const DensityOctree& octree, const AOParams& params,
                            int threads) {
    AOField out;
    out.values = ScalarField(model.spec.dims);
    if (octree.level_count() == 0) return out;
    const ScalarField& level0 = octree.level(0);
    const OccupiedTable table(level0);
    // samples reach at most `radius` from the center; trilinear support adds one more cell
    const int reach = int(std::ceil(params.radius)) + 1;
    const auto n = std::int64_t(model.voxel_count());
#pragma omp parallel for schedule(dynamic, 256) num_threads(resolve_threads(threads))
    for (std::int64_t v = 0; v < n; ++v) {
        const Int3 c = model.spec.cell_of(std::uint32_t(v));
        if (table.count(c - Int3{reach, reach, reach}, c + Int3{reach, reach, reach}) == 0) continue;
        out.values.values[std::size_t(v)] = float(ao_sphere_density(to_vec(c) + Vec3{0.5, 0.5, 0.5}, level0, params));
    }
    return out;
}

AOField precompute_voxel_ao_reference(const VoxelModel& model, const DensityOctree& octree, const AOParams& params) {
    AOField out;
    out.values = ScalarField(model.spec.dims);
    if (octree.level_count() == 0) return out;
    for (std::size_t v = 0; v < model.voxel_count(); ++v) {
        const Int3 c = model.spec.cell_of(std::uint32_t(v));
        out.values.values[v] = float(ao_sphere_density(to_vec(c) + Vec3{0.5, 0.5, 0.5}, octree.level(0), params));
    }
    return out;
}

}  // namespace linevox
