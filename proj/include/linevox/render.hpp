#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linevox/camera.hpp"
#include "linevox/illumination.hpp"
#include "linevox/image.hpp"
#include "linevox/lod.hpp"
#include "linevox/shading.hpp"
#include "linevox/tubes.hpp"

namespace linevox {

enum class OpacityMode { constant, transfer, distance_scaled };
enum class NeighborMode { off, on, automatic };
enum class ShadowMode { none, hard, replines, cone };
enum class AoMode { none, hemisphere_geometry, density_rays, precomputed };

struct RenderParams {
    double tube_radius = 0.25;
    OpacityMode opacity_mode = OpacityMode::constant;
    double base_opacity = 1.0;
    double tau = 0.95;
    NeighborMode neighbor_mode = NeighborMode::on;
    ShadowMode shadow_mode = ShadowMode::none;
    AoMode ao_mode = AoMode::none;
    Rgba background{1, 1, 1, 1};
    bool joint_spheres = true;
    ShadingCoeffs shading;
    Vec3 light_camera{0.4, 0.6, 1.0};  // directional, camera space (z toward the viewer)
    AOParams ao;
    int shadow_lod = 2;                // LoD level of the representative lines used for shadows
    double rep_max_scale = 4.0;        // representative radius = tube_radius * clamp(weight, 1, this)

    /// Throws std::invalid_argument for values outside their documented ranges.
    void validate() const;
    TubeStyle tube_style() const { return {tube_radius, joint_spheres}; }
};

std::string to_string(OpacityMode m);
std::string to_string(NeighborMode m);
std::string to_string(ShadowMode m);
std::string to_string(AoMode m);
/// Inverse of to_string; throws std::invalid_argument naming the accepted values.
OpacityMode parse_opacity_mode(const std::string& s);
NeighborMode parse_neighbor_mode(const std::string& s);
ShadowMode parse_shadow_mode(const std::string& s);
AoMode parse_ao_mode(const std::string& s);

/// A voxel model plus everything derived from it. Read-only while frames render.
struct Scene {
    VoxelModel model;
    DensityOctree octree;
    RepLineField replines;
    AOField ao;  // optional; required by AoMode::precomputed
    NeighborOccupancy occupancy;

    /// Builds the octree, representative lines and occupancy when missing.
    void prepare(int threads = 0);
};

/// One ray-capsule intersection with a stored segment.
struct TubeHit {
    double t_in = 0.0, t_out = 0.0;
    Vec3 normal;
    std::uint32_t voxel = 0;    // linear index of the voxel of origin
    std::uint32_t segment = 0;  // global record index (records are grouped by voxel)
    std::uint8_t local_id = 0;
    std::uint8_t attr = 0;
};

/// Global visibility order: entry distance, then record index.
inline bool hit_before(const TubeHit& a, const TubeHit& b) {
    return a.t_in < b.t_in || (a.t_in == b.t_in && a.segment < b.segment);
}

struct FrameStats {
    std::uint64_t rays = 0;
    std::uint64_t voxel_steps = 0;
    std::uint64_t intersection_tests = 0;
    std::uint64_t composited = 0;
    std::uint64_t id_suppressed = 0;  // hits dropped because another line shared (voxel, local id)
    double ms = 0.0;

    FrameStats& operator+=(const FrameStats& o);
};

/// Shades, dedupes and composites hits fed in visibility order. Shared by the ray-caster and the
/// brute-force oracle so both produce the same pixel from the same hit sequence.
class HitCompositor {
public:
    HitCompositor(const Scene& scene, const RenderParams& params, const Vec3& light_dir, FrameStats& stats);

    /// Returns true once accumulated opacity reached tau.
    bool add(const Ray& ray, const TubeHit& hit);
    bool done() const { return compositor_.done(); }
    Rgba resolve() const { return compositor_.resolve(params_.background); }

    Fragment shade(const Ray& ray, const TubeHit& hit) const;
    double opacity(const TubeHit& hit) const;

private:
    bool seen(const TubeHit& hit);

    const Scene& scene_;
    const RenderParams& params_;
    Vec3 light_;
    FrameStats& stats_;
    Compositor compositor_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> masks_;  // (voxel, local id bits)
};

struct RenderOptions {
    int threads = 0;             // 0 = OpenMP default
    bool camera_moving = false;  // drives NeighborMode::automatic
};

/// Neighbor gathering actually used for a frame.
bool neighbors_enabled(const RenderParams& params, const RenderOptions& options);

/// Traverses, gathers, shades and composites one primary ray. Returns premultiplied RGBA with the
/// background blended under.
Rgba trace_ray(const Scene& scene, const RenderParams& params, const Ray& ray, const Vec3& light_dir, bool neighbors,
               FrameStats& stats);

struct Frame {
    Image image;
    FrameStats stats;
};

/// Parallel over 16x16 tiles; output is independent of the worker count.
Frame render_frame(const Camera& camera, const Scene& scene, const RenderParams& params,
                   const RenderOptions& options = {});
/// Single-threaded row-major reference.
Frame render_frame_serial(const Camera& camera, const Scene& scene, const RenderParams& params,
                          const RenderOptions& options = {});

/// Checks that the scene carries the data the params need (throws std::invalid_argument).
void check_scene_for(const Scene& scene, const RenderParams& params);

}  // namespace linevox
