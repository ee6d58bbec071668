#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "linevox/vec.hpp"

namespace linevox {

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit length for every caller that interprets t as distance
};

inline Vec3 ray_at(const Ray& r, double t) { return r.origin + r.dir * t; }

/// Entry/exit interval of a ray against a convex primitive.
struct Interval {
    double t_in = 0.0, t_out = 0.0;
    Vec3 normal;  // unit normal at the entry point, facing the ray
};

/// Standard quadratic. t_in is clamped to 0 when the origin is inside; nothing if behind the origin.
std::optional<Interval> intersect_ray_sphere(const Ray& ray, const Vec3& center, double radius);

/// Cylinder of `radius` about line AB clipped to the slab between the end planes through A and B.
/// Degenerates to the sphere test when A == B.
std::optional<Interval> intersect_ray_tube(const Ray& ray, const Vec3& a, const Vec3& b, double radius);

/// Union of the tube and the requested endpoint spheres. The union is convex, so the result is one
/// interval: earliest entry (with its normal) to latest exit.
std::optional<Interval> intersect_capsule(const Ray& ray, const Vec3& a, const Vec3& b, double radius,
                                          bool sphere_at_a, bool sphere_at_b);

/// Slab test against an axis-aligned box; returns [t0, t1] clipped to t >= 0.
std::optional<std::pair<double, double>> intersect_ray_box(const Ray& ray, const Vec3& lo, const Vec3& hi);

struct VoxelVisit {
    Int3 cell;
    double t_enter = 0.0, t_exit = 0.0;
};

/// Amanatides-Woo stepping over the cells of the box [lo, hi) (integer cell bounds). Visits every
/// cell whose intersection with the ray has positive length, in increasing t. `visit` returns
/// false to stop early.
template <typename Visit>
void walk_cells(const Ray& ray, const Int3& lo, const Int3& hi, Visit&& visit) {
    const auto span = intersect_ray_box(ray, to_vec(lo), to_vec(hi));
    if (!span || !(span->first < span->second)) return;
    const double t0 = span->first, t1 = span->second;
    const Vec3 p = ray_at(ray, t0);
    Int3 cell;
    double t_next[3], t_delta[3];
    int step[3];
    for (int a = 0; a < 3; ++a) {
        const double d = ray.dir[a];
        const double v = d < 0.0 ? std::ceil(p[a]) - 1.0 : std::floor(p[a]);
        cell[a] = std::clamp(int(v), lo[a], hi[a] - 1);
        if (d > 0.0) {
            step[a] = 1;
            t_delta[a] = 1.0 / d;
            t_next[a] = (double(cell[a] + 1) - ray.origin[a]) / d;
        } else if (d < 0.0) {
            step[a] = -1;
            t_delta[a] = -1.0 / d;
            t_next[a] = (double(cell[a]) - ray.origin[a]) / d;
        } else {
            step[a] = 0;
            t_delta[a] = std::numeric_limits<double>::infinity();
            t_next[a] = std::numeric_limits<double>::infinity();
        }
    }
    double t = t0;
    for (;;) {
        const double tn = std::min({t_next[0], t_next[1], t_next[2]});
        const double t_exit = std::min(tn, t1);
        if (t_exit > t && !visit(VoxelVisit{cell, t, t_exit})) return;
        if (tn >= t1) return;
        // step every axis whose boundary is crossed at tn (edge/corner crossings skip zero-length cells)
        for (int a = 0; a < 3; ++a) {
            if (t_next[a] != tn) continue;
            cell[a] += step[a];
            t_next[a] += t_delta[a];
            if (cell[a] < lo[a] || cell[a] >= hi[a]) return;
        }
        t = tn;
    }
}

/// Cells of the grid [0, dims) pierced by the ray, in order; empty if the ray misses.
std::vector<VoxelVisit> traverse_voxels(const Ray& ray, const Int3& dims);

}  // namespace linevox
