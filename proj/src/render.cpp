#include "linevox/render.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "linevox/parallel.hpp"

namespace linevox {

void RenderParams::validate() const {
    if (!(tube_radius > 0.0 && tube_radius <= 1.0)) throw std::invalid_argument("tube_radius must be in (0, 1]");
    if (!(base_opacity > 0.0 && base_opacity <= 1.0)) throw std::invalid_argument("opacity must be in (0, 1]");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in (0, 1]");
    if (ao.n_rays < 1) throw std::invalid_argument("ao rays must be >= 1");
    if (!(ao.radius > 0.0)) throw std::invalid_argument("ao radius must be > 0");
    if (!(ao.step > 0.0)) throw std::invalid_argument("ao step must be > 0");
    if (shadow_lod < 1) throw std::invalid_argument("shadow_lod must be >= 1");
    if (!(rep_max_scale >= 1.0)) throw std::invalid_argument("rep_max_scale must be >= 1");
    if (length_sq(light_camera) == 0.0) throw std::invalid_argument("light direction must be non-zero");
}

namespace {

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::pair<const char*, E> (&table)[N], const char* what) {
    std::string accepted;
    for (const auto& [name, value] : table) {
        if (s == name) return value;
        accepted += accepted.empty() ? name : std::string("|") + name;
    }
    throw std::invalid_argument("unknown " + std::string(what) + " '" + s + "' (expected " + accepted + ")");
}

template <typename E, std::size_t N>
std::string enum_name(E v, const std::pair<const char*, E> (&table)[N]) {
    for (const auto& [name, value] : table)
        if (value == v) return name;
    return "?";
}

constexpr std::pair<const char*, OpacityMode> kOpacityNames[] = {
    {"constant", OpacityMode::constant}, {"transfer", OpacityMode::transfer},
    {"distance-scaled", OpacityMode::distance_scaled}};
constexpr std::pair<const char*, NeighborMode> kNeighborNames[] = {
    {"off", NeighborMode::off}, {"on", NeighborMode::on}, {"auto", NeighborMode::automatic}};
constexpr std::pair<const char*, ShadowMode> kShadowNames[] = {
    {"none", ShadowMode::none}, {"hard", ShadowMode::hard}, {"replines", ShadowMode::replines},
    {"cone", ShadowMode::cone}};
constexpr std::pair<const char*, AoMode> kAoNames[] = {
    {"none", AoMode::none}, {"hemisphere-geometry", AoMode::hemisphere_geometry},
    {"density-rays", AoMode::density_rays}, {"precomputed", AoMode::precomputed}};

}  // namespace

std::string to_string(OpacityMode m) { return enum_name(m, kOpacityNames); }
std::string to_string(NeighborMode m) { return enum_name(m, kNeighborNames); }
std::string to_string(ShadowMode m) { return enum_name(m, kShadowNames); }
std::string to_string(AoMode m) { return enum_name(m, kAoNames); }
OpacityMode parse_opacity_mode(const std::string& s) { return parse_enum(s, kOpacityNames, "opacity mode"); }
NeighborMode parse_neighbor_mode(const std::string& s) { return parse_enum(s, kNeighborNames, "neighbor mode"); }
ShadowMode parse_shadow_mode(const std::string& s) { return parse_enum(s, kShadowNames, "shadow mode"); }
AoMode parse_ao_mode(const std::string& s) { return parse_enum(s, kAoNames, "ao mode"); }

void Scene::prepare(int threads) {
    if (octree.level_count() == 0) octree = build_octree(compute_density_level0(model, threads), threads);
    if (replines.levels.empty()) replines = build_rep_lines(model, octree, threads);
    if (!occupancy.built()) occupancy = NeighborOccupancy(model);
}

FrameStats& FrameStats::operator+=(const FrameStats& o) {
    rays += o.rays;
    voxel_steps += o.voxel_steps;
    intersection_tests += o.intersection_tests;
    composited += o.composited;
    id_suppressed += o.id_suppressed;
    return *this;
}

HitCompositor::HitCompositor(const Scene& scene, const RenderParams& params, const Vec3& light_dir, FrameStats& stats)
    : scene_(scene), params_(params), light_(light_dir), stats_(stats), compositor_(params.tau) {}

bool HitCompositor::seen(const TubeHit& hit) {
    const std::uint32_t bit = 1u << hit.local_id;
    for (auto& [voxel, mask] : masks_) {
        if (voxel != hit.voxel) continue;
        if (mask & bit) return true;
        mask |= bit;
        return false;
    }
    masks_.emplace_back(hit.voxel, bit);
    return false;
}

double HitCompositor::opacity(const TubeHit& hit) const {
    switch (params_.opacity_mode) {
        case OpacityMode::transfer: return scene_.model.transfer[hit.attr].a;
        case OpacityMode::distance_scaled:
            return 1.0 - std::pow(1.0 - params_.base_opacity, std::max(0.0, hit.t_out - hit.t_in));
        case OpacityMode::constant: break;
    }
    return params_.base_opacity;
}

Fragment HitCompositor::shade(const Ray& ray, const TubeHit& hit) const {
    const Vec3 p = ray_at(ray, hit.t_in);
    const Vec3& n = hit.normal;
    const TubeStyle style = params_.tube_style();
    const NeighborOccupancy* occ = scene_.occupancy.built() ? &scene_.occupancy : nullptr;

    double blocking = 0.0;
    switch (params_.shadow_mode) {
        case ShadowMode::hard:
            blocking = 1.0 - hard_shadow(p, n, Light{Light::Kind::directional, light_}, scene_.model, style, occ);
            break;
        case ShadowMode::replines:
            blocking = 1.0 - replines_shadow(p, n, Light{Light::Kind::directional, light_},
                                             *scene_.replines.level(params_.shadow_lod), scene_.replines.bins,
                                             params_.tube_radius, params_.rep_max_scale);
            break;
        case ShadowMode::cone: blocking = cone_soft_shadow(p + n * kSurfaceOffset, light_, scene_.octree); break;
        case ShadowMode::none: break;
    }
    double ao = 0.0;
    switch (params_.ao_mode) {
        case AoMode::hemisphere_geometry: ao = ao_hemisphere_geometry(p, n, scene_.model, style, params_.ao, occ); break;
        case AoMode::density_rays: ao = ao_density_rays(p, n, scene_.octree, params_.ao); break;
        case AoMode::precomputed: ao = scene_.ao.sample(p); break;
        case AoMode::none: break;
    }
    const double s = shade_local(n, light_, -ray.dir, params_.shading, ao) * (1.0 - blocking);
    const Rgba& c = scene_.model.transfer[hit.attr];
    const auto channel = [s](float v) { return float(std::clamp(double(v) * s, 0.0, 1.0)); };
    return {channel(c.r), channel(c.g), channel(c.b), float(opacity(hit))};
}

bool HitCompositor::add(const Ray& ray, const TubeHit& hit) {
    if (seen(hit)) {
        ++stats_.id_suppressed;
        return done();
    }
    ++stats_.composited;
    return compositor_.add(shade(ray, hit));
}

bool neighbors_enabled(const RenderParams& params, const RenderOptions& options) {
    switch (params.neighbor_mode) {
        case NeighborMode::off: return false;
        case NeighborMode::on: return true;
        case NeighborMode::automatic: return !options.camera_moving;
    }
    return true;
}

namespace {

TubeHit make_hit(const Interval& iv, std::uint32_t voxel, std::uint32_t segment, const QuantizedSegment& s) {
    return {iv.t_in, iv.t_out, iv.normal, voxel, segment, s.local_line_id, s.attr_index};
}

// min-heap order for pending hits
bool heap_after(const TubeHit& a, const TubeHit& b) { return hit_before(b, a); }

}  // namespace

Rgba trace_ray(const Scene& scene, const RenderParams& params, const Ray& ray, const Vec3& light_dir, bool neighbors,
               FrameStats& stats) {
    ++stats.rays;
    HitCompositor comp(scene, params, light_dir, stats);
    const VoxelModel& m = scene.model;
    const TubeStyle style = params.tube_style();
    const Int3 dims = m.spec.dims;
    thread_local std::vector<TubeHit> hits;
    hits.clear();

    if (neighbors) {
        // Hits are gathered when their voxel first enters the 26-neighborhood of the walk and
        // composited once the walk reaches the cell containing their entry point.
        const NeighborOccupancy* occ = scene.occupancy.built() ? &scene.occupancy : nullptr;
        NeighborGatherer gatherer;
        bool done = false;
        walk_cells(ray, Int3{-1, -1, -1}, Int3{dims.x + 1, dims.y + 1, dims.z + 1}, [&](const VoxelVisit& v) {
            ++stats.voxel_steps;
            if (!occ || occ->any(v.cell)) {
                gatherer.gather(v.cell, m.spec, m.counts, [&](const Int3& cell, std::uint32_t voxel) {
                    const std::uint32_t first = m.offsets[voxel];
                    for (std::uint32_t k = 0; k < m.counts[voxel]; ++k) {
                        ++stats.intersection_tests;
                        const auto seg = m.segment(first + k);
                        if (const auto iv = intersect_segment(ray, cell, seg, m, style)) {
                            hits.push_back(make_hit(*iv, voxel, first + k, seg));
                            std::push_heap(hits.begin(), hits.end(), heap_after);
                        }
                    }
                });
            }
            while (!hits.empty() && hits.front().t_in < v.t_exit) {
                std::pop_heap(hits.begin(), hits.end(), heap_after);
                const TubeHit h = hits.back();
                hits.pop_back();
                if (comp.add(ray, h)) {
                    done = true;
                    return false;
                }
            }
            return true;
        });
        while (!done && !hits.empty()) {
            std::pop_heap(hits.begin(), hits.end(), heap_after);
            const TubeHit h = hits.back();
            hits.pop_back();
            done = comp.add(ray, h);
        }
        return comp.resolve();
    }

    walk_cells(ray, Int3{0, 0, 0}, dims, [&](const VoxelVisit& v) {
        ++stats.voxel_steps;
        const std::uint32_t voxel = m.spec.linear_index(v.cell);
        const std::uint32_t count = m.counts[voxel];
        if (count == 0) return true;
        const std::uint32_t first = m.offsets[voxel];
        hits.clear();
        for (std::uint32_t k = 0; k < count; ++k) {
            ++stats.intersection_tests;
            const auto seg = m.segment(first + k);
            const auto iv = intersect_segment(ray, v.cell, seg, m, style);
            // ownership: only entries inside this voxel's span count
            if (iv && iv->t_in >= v.t_enter && iv->t_in < v.t_exit) {
                // insertion sort; per-voxel hit lists are short
                const TubeHit h = make_hit(*iv, voxel, first + k, seg);
                auto pos = hits.end();
                while (pos != hits.begin() && hit_before(h, *(pos - 1))) --pos;
                hits.insert(pos, h);
            }
        }
        for (const TubeHit& h : hits)
            if (comp.add(ray, h)) return false;
        return true;
    });
    return comp.resolve();
}

void check_scene_for(const Scene& scene, const RenderParams& params) {
    const bool needs_octree = params.shadow_mode == ShadowMode::cone || params.ao_mode == AoMode::density_rays;
    if (needs_octree && scene.octree.level_count() == 0) throw std::invalid_argument("scene has no density octree");
    if (params.shadow_mode == ShadowMode::replines && !scene.replines.level(params.shadow_lod))
        throw std::invalid_argument("scene has no representative lines at level " + std::to_string(params.shadow_lod));
    if (params.ao_mode == AoMode::precomputed &&
        (scene.ao.empty() || !(scene.ao.values.dims == scene.model.spec.dims)))
        throw std::invalid_argument("scene has no precomputed AO field (run precompute-ao)");
}

namespace {

constexpr int kTile = 16;

Vec3 light_for(const Camera& camera, const RenderParams& params) {
    return normalize(camera.to_world(normalize(params.light_camera)));
}

void render_tile(const Camera& camera, const Scene& scene, const RenderParams& params, bool neighbors,
                 const Vec3& light, int tx, int ty, Image& img, FrameStats& stats) {
    const int x1 = std::min(camera.width, (tx + 1) * kTile), y1 = std::min(camera.height, (ty + 1) * kTile);
    for (int y = ty * kTile; y < y1; ++y)
        for (int x = tx * kTile; x < x1; ++x)
            img.set(x, y, trace_ray(scene, params, camera.primary_ray(x, y), light, neighbors, stats));
}

}  // namespace

Frame render_frame(const Camera& camera, const Scene& scene, const RenderParams& params,
                   const RenderOptions& options) {
    camera.validate();
    params.validate();
    check_scene_for(scene, params);
    const auto start = std::chrono::steady_clock::now();
    Frame frame{Image(camera.width, camera.height), {}};
    const bool neighbors = neighbors_enabled(params, options);
    const Vec3 light = light_for(camera, params);
    const int tiles_x = (camera.width + kTile - 1) / kTile, tiles_y = (camera.height + kTile - 1) / kTile;
    const int n_tiles = tiles_x * tiles_y;
    std::vector<FrameStats> tile_stats(static_cast<std::size_t>(n_tiles));
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(options.threads))
    for (int t = 0; t < n_tiles; ++t)
        render_tile(camera, scene, params, neighbors, light, t % tiles_x, t / tiles_x, frame.image,
                    tile_stats[std::size_t(t)]);
    for (const auto& s : tile_stats) frame.stats += s;
    frame.stats.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return frame;
}

Frame render_frame_serial(const Camera& camera, const Scene& scene, const RenderParams& params,
                          const RenderOptions& options) {
    camera.validate();
    params.validate();
    check_scene_for(scene, params);
    const auto start = std::chrono::steady_clock::now();
    Frame frame{Image(camera.width, camera.height), {}};
    const bool neighbors = neighbors_enabled(params, options);
    const Vec3 light = light_for(camera, params);
    for (int y = 0; y < camera.height; ++y)
        for (int x = 0; x < camera.width; ++x)
            frame.image.set(x, y, trace_ray(scene, params, camera.primary_ray(x, y), light, neighbors, frame.stats));
    frame.stats.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return frame;
}

}  // namespace linevox
