#pragma once

#include <stdexcept>

#include "linevox/geometry.hpp"

namespace linevox {

/// Pinhole camera in grid-local units. One primary ray through each pixel center.
struct Camera {
    Vec3 position{0, 0, 0};
    Vec3 target{0, 0, 1};
    Vec3 up{0, 0, 1};
    double fov_deg = 45.0;  // vertical
    int width = 640;
    int height = 360;

    /// Throws std::invalid_argument on fov outside (0,180), empty image, or up parallel to the view.
    void validate() const {
        if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw std::invalid_argument("fov must be in (0, 180)");
        if (width < 1 || height < 1) throw std::invalid_argument("image size must be >= 1x1");
        const Vec3 f = target - position;
        if (length_sq(f) == 0.0) throw std::invalid_argument("camera position equals target");
        if (length_sq(cross(normalize(f), up)) < 1e-18) throw std::invalid_argument("up is parallel to the view direction");
    }

    struct Basis {
        Vec3 right, up, forward;
    };
    Basis basis() const {
        const Vec3 f = normalize(target - position);
        const Vec3 r = normalize(cross(f, up));
        return {r, cross(r, f), f};
    }

    Ray primary_ray(int px, int py) const {
        const Basis b = basis();
        const double h = std::tan(fov_deg * 3.14159265358979323846 / 360.0);
        const double aspect = double(width) / double(height);
        const double x = (2.0 * (px + 0.5) / width - 1.0) * h * aspect;
        const double y = (1.0 - 2.0 * (py + 0.5) / height) * h;
        return {position, normalize(b.forward + b.right * x + b.up * y)};
    }

    /// Camera-space vector (x right, y up, z toward the viewer) to world space.
    Vec3 to_world(const Vec3& v) const {
        const Basis b = basis();
        return b.right * v.x + b.up * v.y - b.forward * v.z;
    }
};

}  // namespace linevox
