#include "linevox/config.hpp"

#include <fstream>
#include <set>

namespace linevox {

using nlohmann::json;

json params_to_json(const RenderParams& p) {
    return {
        {"tube_radius", p.tube_radius},
        {"opacity_mode", to_string(p.opacity_mode)},
        {"base_opacity", p.base_opacity},
        {"tau", p.tau},
        {"neighbor_mode", to_string(p.neighbor_mode)},
        {"shadow_mode", to_string(p.shadow_mode)},
        {"ao_mode", to_string(p.ao_mode)},
        {"background", {p.background.r, p.background.g, p.background.b, p.background.a}},
        {"joint_spheres", p.joint_spheres},
        {"shading",
         {{"ambient", p.shading.ambient},
          {"diffuse", p.shading.diffuse},
          {"specular", p.shading.specular},
          {"shininess", p.shading.shininess}}},
        {"light_camera", {p.light_camera.x, p.light_camera.y, p.light_camera.z}},
        {"ao", {{"n_rays", p.ao.n_rays}, {"radius", p.ao.radius}, {"step", p.ao.step}, {"jitter", p.ao.jitter}}},
        {"shadow_lod", p.shadow_lod},
        {"rep_max_scale", p.rep_max_scale},
    };
}

namespace {

template <typename T>
T get(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("bad value for '" + key + "': " + j.dump());
    }
}

std::vector<double> numbers(const json& j, const std::string& key, std::size_t n) {
    const auto v = get<std::vector<double>>(j, key);
    if (v.size() != n) throw std::invalid_argument("'" + key + "' needs " + std::to_string(n) + " numbers");
    return v;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw std::invalid_argument("unknown " + where + " key '" + key + "'");
}

}  // namespace

void apply_params_json(RenderParams& p, const json& j) {
    reject_unknown(j,
                   {"tube_radius", "opacity_mode", "base_opacity", "tau", "neighbor_mode", "shadow_mode", "ao_mode",
                    "background", "joint_spheres", "shading", "light_camera", "ao", "shadow_lod", "rep_max_scale"},
                   "params");
    RenderParams q = p;
    if (j.contains("tube_radius")) q.tube_radius = get<double>(j["tube_radius"], "tube_radius");
    if (j.contains("opacity_mode")) q.opacity_mode = parse_opacity_mode(get<std::string>(j["opacity_mode"], "opacity_mode"));
    if (j.contains("base_opacity")) q.base_opacity = get<double>(j["base_opacity"], "base_opacity");
    if (j.contains("tau")) q.tau = get<double>(j["tau"], "tau");
    if (j.contains("neighbor_mode"))
        q.neighbor_mode = parse_neighbor_mode(get<std::string>(j["neighbor_mode"], "neighbor_mode"));
    if (j.contains("shadow_mode")) q.shadow_mode = parse_shadow_mode(get<std::string>(j["shadow_mode"], "shadow_mode"));
    if (j.contains("ao_mode")) q.ao_mode = parse_ao_mode(get<std::string>(j["ao_mode"], "ao_mode"));
    if (j.contains("background")) {
        const auto v = numbers(j["background"], "background", 4);
        q.background = {float(v[0]), float(v[1]), float(v[2]), float(v[3])};
    }
    if (j.contains("joint_spheres")) q.joint_spheres = get<bool>(j["joint_spheres"], "joint_spheres");
    if (j.contains("shading")) {
        const json& s = j["shading"];
        reject_unknown(s, {"ambient", "diffuse", "specular", "shininess"}, "shading");
        if (s.contains("ambient")) q.shading.ambient = get<double>(s["ambient"], "shading.ambient");
        if (s.contains("diffuse")) q.shading.diffuse = get<double>(s["diffuse"], "shading.diffuse");
        if (s.contains("specular")) q.shading.specular = get<double>(s["specular"], "shading.specular");
        if (s.contains("shininess")) q.shading.shininess = get<double>(s["shininess"], "shading.shininess");
    }
    if (j.contains("light_camera")) {
        const auto v = numbers(j["light_camera"], "light_camera", 3);
        q.light_camera = {v[0], v[1], v[2]};
    }
    if (j.contains("ao")) {
        const json& a = j["ao"];
        reject_unknown(a, {"n_rays", "radius", "step", "jitter"}, "ao");
        if (a.contains("n_rays")) q.ao.n_rays = get<int>(a["n_rays"], "ao.n_rays");
        if (a.contains("radius")) q.ao.radius = get<double>(a["radius"], "ao.radius");
        if (a.contains("step")) q.ao.step = get<double>(a["step"], "ao.step");
        if (a.contains("jitter")) q.ao.jitter = get<std::uint64_t>(a["jitter"], "ao.jitter");
    }
    if (j.contains("shadow_lod")) q.shadow_lod = get<int>(j["shadow_lod"], "shadow_lod");
    if (j.contains("rep_max_scale")) q.rep_max_scale = get<double>(j["rep_max_scale"], "rep_max_scale");
    q.validate();
    p = q;
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace linevox
