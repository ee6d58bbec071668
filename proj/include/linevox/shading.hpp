#pragma once

#include <span>

#include "linevox/transfer.hpp"
#include "linevox/vec.hpp"

namespace linevox {

/// Blinn-style local illumination coefficients.
struct ShadingCoeffs {
    double ambient = 0.2;
    double diffuse = 0.7;
    double specular = 0.3;
    double shininess = 32.0;
};

/// k_a*(1 - ao) + k_d*max(n.l, 0) + k_s*max(n.h, 0)^p with h the half vector of l and v.
/// All direction arguments are unit vectors pointing away from the surface.
double shade_local(const Vec3& normal, const Vec3& to_light, const Vec3& to_view, const ShadingCoeffs& k,
                   double ambient_occlusion = 0.0);

struct Fragment {
    float r = 0, g = 0, b = 0;  // straight (non-premultiplied) color
    float alpha = 0;
};

/// Front-to-back alpha compositing with termination once accumulated opacity reaches `tau`.
class Compositor {
public:
    explicit Compositor(double tau) : tau_(tau) {}

    /// Returns true once the ray may terminate.
    bool add(const Fragment& f) {
        const double w = (1.0 - a_) * f.alpha;
        r_ += w * f.r;
        g_ += w * f.g;
        b_ += w * f.b;
        a_ += w;
        ++count_;
        return done();
    }
    bool done() const { return a_ >= tau_; }
    double alpha() const { return a_; }
    int count() const { return count_; }

    /// Accumulated color with `background` blended underneath (premultiplied result).
    Rgba resolve(const Rgba& background) const {
        const double t = 1.0 - a_;
        return {float(r_ + t * background.a * background.r), float(g_ + t * background.a * background.g),
                float(b_ + t * background.a * background.b), float(a_ + t * background.a)};
    }

private:
    double tau_;
    double r_ = 0, g_ = 0, b_ = 0, a_ = 0;
    int count_ = 0;
};

/// Composites an ordered fragment list; convenience over Compositor.
Rgba composite(std::span<const Fragment> ordered, double tau, const Rgba& background);

}  // namespace linevox
