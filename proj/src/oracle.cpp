#include "linevox/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>

#include "linevox/parallel.hpp"

namespace linevox {

PrimitiveList::PrimitiveList(const VoxelModel& model, double tube_radius) {
    items.reserve(model.segment_count());
    for (std::size_t v = 0; v < model.voxel_count(); ++v) {
        const Int3 cell = model.spec.cell_of(std::uint32_t(v));
        for (std::uint32_t k = 0; k < model.counts[v]; ++k) {
            const std::uint32_t index = model.offsets[v] + k;
            const auto seg = model.segment(index);
            const auto [a, b] = model.endpoints(cell, seg);
            items.push_back({cell, std::uint32_t(v), index, seg, (a + b) * 0.5, 0.5 * distance(a, b) + tube_radius});
        }
    }
}

namespace {

// Bounding spheres relative to a shared ray origin, single precision, structure of arrays.
struct RelativeSpheres {
    std::vector<float> x, y, z, r;

    RelativeSpheres(const PrimitiveList& prims, const Vec3& origin) {
        const std::size_t n = prims.size();
        x.resize(n), y.resize(n), z.resize(n), r.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 p = prims.items[i].center - origin;
            x[i] = float(p.x), y[i] = float(p.y), z[i] = float(p.z);
            // slack covers float rounding of the distance terms, so true hits are never rejected
            r[i] = float(prims.items[i].reach + 1e-3 + 1e-5 * length(p));
        }
    }
};

// Appends indices in [begin, end) whose sphere may meet the ray (conservative).
void sphere_candidates(const RelativeSpheres& s, std::size_t begin, std::size_t end, const Vec3& dir,
                       std::vector<std::uint32_t>& out) {
    constexpr std::size_t kBlock = 256;
    alignas(64) std::uint8_t mask[kBlock] = {};
    const float dx = float(dir.x), dy = float(dir.y), dz = float(dir.z);
    const float *px = s.x.data(), *py = s.y.data(), *pz = s.z.data(), *pr = s.r.data();
    for (std::size_t b = begin; b < end; b += kBlock) {
        const std::size_t m = std::min(kBlock, end - b);
#pragma omp simd
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t i = b + j;
            const float along = px[i] * dx + py[i] * dy + pz[i] * dz;
            // distance to the ray line via the cross product (no cancellation at long range)
            const float cx = py[i] * dz - pz[i] * dy;
            const float cy = pz[i] * dx - px[i] * dz;
            const float cz = px[i] * dy - py[i] * dx;
            const float r = pr[i];
            mask[j] = std::uint8_t((along >= -r) & (cx * cx + cy * cy + cz * cz <= r * r));
        }
        // candidates are sparse: skip eight mask bytes at a time
        for (std::size_t j = 0; j < m; j += 8) {
            std::uint64_t word;
            std::memcpy(&word, mask + j, 8);
            if (word == 0) continue;
            for (std::size_t k = j; k < std::min(m, j + 8); ++k)
                if (mask[k]) out.push_back(std::uint32_t(b + k));
        }
    }
}

Rgba resolve_candidates(const Scene& scene, const PrimitiveList& prims, const RenderParams& params, const Ray& ray,
                        const Vec3& light_dir, const std::vector<std::uint32_t>& candidates, FrameStats& stats) {
    const TubeStyle style = params.tube_style();
    thread_local std::vector<TubeHit> hits;
    hits.clear();
    for (const std::uint32_t i : candidates) {
        const auto& it = prims.items[i];
        if (const auto iv = intersect_segment(ray, it.cell, it.seg, scene.model, style))
            hits.push_back({iv->t_in, iv->t_out, iv->normal, it.voxel, it.segment, it.seg.local_line_id,
                            it.seg.attr_index});
    }
    std::sort(hits.begin(), hits.end(), hit_before);
    HitCompositor comp(scene, params, light_dir, stats);
    for (const auto& h : hits)
        if (comp.add(ray, h)) break;
    return comp.resolve();
}

}  // namespace

Rgba brute_force_trace(const Scene& scene, const PrimitiveList& prims, const RenderParams& params, const Ray& ray,
                       const Vec3& light_dir, FrameStats& stats) {
    ++stats.rays;
    stats.intersection_tests += prims.size();
    const RelativeSpheres spheres(prims, ray.origin);
    std::vector<std::uint32_t> candidates;
    sphere_candidates(spheres, 0, prims.size(), ray.dir, candidates);
    return resolve_candidates(scene, prims, params, ray, light_dir, candidates, stats);
}

Frame brute_force_render(const Camera& camera, const Scene& scene, const RenderParams& params, int threads) {
    camera.validate();
    params.validate();
    check_scene_for(scene, params);
    const auto start = std::chrono::steady_clock::now();
    const PrimitiveList prims(scene.model, params.tube_radius);
    const RelativeSpheres spheres(prims, camera.position);
    const Vec3 light = normalize(camera.to_world(normalize(params.light_camera)));
    Frame frame{Image(camera.width, camera.height), {}};

    constexpr int kTile = 8;
    constexpr std::size_t kChunk = 2048;  // primitives kept hot in cache across a tile's rays
    const int tiles_x = (camera.width + kTile - 1) / kTile, tiles_y = (camera.height + kTile - 1) / kTile;
    const int n_tiles = tiles_x * tiles_y;
    std::vector<FrameStats> tile_stats(static_cast<std::size_t>(n_tiles));
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(threads))
    for (int t = 0; t < n_tiles; ++t) {
        const int x0 = (t % tiles_x) * kTile, y0 = (t / tiles_x) * kTile;
        const int x1 = std::min(camera.width, x0 + kTile), y1 = std::min(camera.height, y0 + kTile);
        std::vector<Ray> rays;
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) rays.push_back(camera.primary_ray(x, y));
        std::vector<std::vector<std::uint32_t>> candidates(rays.size());
        for (std::size_t c = 0; c < prims.size(); c += kChunk)
            for (std::size_t r = 0; r < rays.size(); ++r)
                sphere_candidates(spheres, c, std::min(prims.size(), c + kChunk), rays[r].dir, candidates[r]);
        FrameStats& stats = tile_stats[std::size_t(t)];
        std::size_t r = 0;
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x, ++r) {
                ++stats.rays;
                stats.intersection_tests += prims.size();
                frame.image.set(x, y, resolve_candidates(scene, prims, params, rays[r], light, candidates[r], stats));
            }
    }
    for (const auto& s : tile_stats) frame.stats += s;
    frame.stats.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return frame;
}

}  // namespace linevox
