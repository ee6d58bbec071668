#include "linevox/geometry.hpp"

namespace linevox {

std::optional<Interval> intersect_ray_sphere(const Ray& ray, const Vec3& center, double radius) {
    const Vec3 oc = ray.origin - center;
    const double a = dot(ray.dir, ray.dir);
    const double half_b = dot(oc, ray.dir);
    const double c = dot(oc, oc) - radius * radius;
    const double disc = half_b * half_b - a * c;
    if (disc < 0.0 || a == 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    double t_in = (-half_b - sq) / a;
    const double t_out = (-half_b + sq) / a;
    if (t_out < 0.0) return std::nullopt;
    Interval iv;
    if (t_in < 0.0) {
        t_in = 0.0;
        iv.normal = -normalize(ray.dir);
    } else {
        iv.normal = normalize(ray_at(ray, t_in) - center);
    }
    iv.t_in = t_in;
    iv.t_out = t_out;
    return iv;
}

std::optional<Interval> intersect_ray_tube(const Ray& ray, const Vec3& a, const Vec3& b, double radius) {
    const Vec3 axis = b - a;
    const double len = length(axis);
    if (len == 0.0) return intersect_ray_sphere(ray, a, radius);
    const Vec3 u = axis / len;
    const Vec3 oa = ray.origin - a;
    const double du = dot(ray.dir, u);
    const double ou = dot(oa, u);
    const Vec3 d_perp = ray.dir - u * du;
    const Vec3 o_perp = oa - u * ou;

    constexpr double inf = std::numeric_limits<double>::infinity();
    double c0 = -inf, c1 = inf;  // infinite-cylinder interval
    const double qa = dot(d_perp, d_perp);
    const double qc = dot(o_perp, o_perp) - radius * radius;
    if (qa <= 1e-300) {
        if (qc > 0.0) return std::nullopt;
    } else {
        const double half_b = dot(o_perp, d_perp);
        const double disc = half_b * half_b - qa * qc;
        if (disc < 0.0) return std::nullopt;
        const double sq = std::sqrt(disc);
        c0 = (-half_b - sq) / qa;
        c1 = (-half_b + sq) / qa;
    }

    double s0 = -inf, s1 = inf;  // slab interval
    if (du == 0.0) {
        if (ou < 0.0 || ou > len) return std::nullopt;
    } else {
        s0 = (0.0 - ou) / du;
        s1 = (len - ou) / du;
        if (s0 > s1) std::swap(s0, s1);
    }

    double t_in = std::max(c0, s0);
    const double t_out = std::min(c1, s1);
    if (t_in > t_out || t_out < 0.0) return std::nullopt;

    Interval iv;
    if (t_in < 0.0) {
        t_in = 0.0;
        iv.normal = -normalize(ray.dir);
    } else if (c0 >= s0) {
        const Vec3 rel = ray_at(ray, t_in) - a;
        iv.normal = normalize(rel - u * dot(rel, u));
    } else {
        // entered through an end cap
        iv.normal = du > 0.0 ? -u : u;
    }
    iv.t_in = t_in;
    iv.t_out = t_out;
    return iv;
}

std::optional<Interval> intersect_capsule(const Ray& ray, const Vec3& a, const Vec3& b, double radius,
                                          bool sphere_at_a, bool sphere_at_b) {
    std::optional<Interval> best = intersect_ray_tube(ray, a, b, radius);
    const auto merge = [&best](const std::optional<Interval>& h) {
        if (!h) return;
        if (!best) {
            best = h;
            return;
        }
        if (h->t_in < best->t_in) {
            best->t_in = h->t_in;
            best->normal = h->normal;
        }
        best->t_out = std::max(best->t_out, h->t_out);
    };
    if (a == b) return best;
    if (sphere_at_a) merge(intersect_ray_sphere(ray, a, radius));
    if (sphere_at_b) merge(intersect_ray_sphere(ray, b, radius));
    return best;
}

std::optional<std::pair<double, double>> intersect_ray_box(const Ray& ray, const Vec3& lo, const Vec3& hi) {
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double d = ray.dir[a];
        if (d == 0.0) {
            if (ray.origin[a] < lo[a] || ray.origin[a] > hi[a]) return std::nullopt;
            continue;
        }
        double ta = (lo[a] - ray.origin[a]) / d;
        double tb = (hi[a] - ray.origin[a]) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return std::nullopt;
    }
    return std::pair{t0, t1};
}

std::vector<VoxelVisit> traverse_voxels(const Ray& ray, const Int3& dims) {
    std::vector<VoxelVisit> out;
    walk_cells(ray, Int3{0, 0, 0}, dims, [&out](const VoxelVisit& v) {
        out.push_back(v);
        return true;
    });
    return out;
}

}  // namespace linevox
