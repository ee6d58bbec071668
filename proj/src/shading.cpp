#include "linevox/shading.hpp"

namespace linevox {

double shade_local(const Vec3& normal, const Vec3& to_light, const Vec3& to_view, const ShadingCoeffs& k,
                   double ambient_occlusion) {
    const Vec3 h = normalize(to_light + to_view);
    const double nl = std::max(dot(normal, to_light), 0.0);
    const double nh = std::max(dot(normal, h), 0.0);
    return k.ambient * (1.0 - ambient_occlusion) + k.diffuse * nl + k.specular * std::pow(nh, k.shininess);
}

Rgba composite(std::span<const Fragment> ordered, double tau, const Rgba& background) {
    Compositor c(tau);
    for (const auto& f : ordered)
        if (c.add(f)) break;
    return c.resolve(background);
}

}  // namespace linevox
