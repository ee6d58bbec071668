#include "cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "linevox/config.hpp"
#include "linevox/illumination.hpp"
#include "linevox/metrics.hpp"
#include "linevox/model_io.hpp"
#include "linevox/oracle.hpp"
#include "linevox/parallel.hpp"
#include "linevox/pipeline.hpp"
#include "linevox/server.hpp"

namespace linevox {

using nlohmann::json;

namespace {

int threads_from(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("LINEVOX_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;
}

void write_json(const json& j, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << '\n';
}

Scene load_model(const std::string& path, int threads) {
    Scene scene = load_vxl(path);
    scene.prepare(threads);
    return scene;
}

volatile std::sig_atomic_t g_interrupted = 0;

extern "C" void on_signal(int) { g_interrupted = 1; }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"linevox: voxel-based ray-casting of large 3D line sets"};
    app.require_subcommand(1);
    app.fallthrough();  // global options such as --threads may follow the subcommand
    app.set_help_all_flag("--help-all", "Show help for all subcommands");
    int threads_flag = 0;
    app.add_option("--threads", threads_flag, "Worker threads (default: LINEVOX_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    // voxelize
    auto* vox = app.add_subcommand("voxelize", "Encode curves (.obj/.lines) into a .vxl model");
    std::string vox_input, vox_out, vox_transfer = "coolwarm";
    int vox_grid = 128, vox_bins = 32;
    std::size_t vox_budget = 0;
    vox->add_option("--input", vox_input, "Curve file (.obj or .lines) or built-in: tornado, tornado-small")->required();
    vox->add_option("--grid", vox_grid, "Voxels along the longest axis")->check(CLI::Range(1, 4096));
    vox->add_option("--bins", vox_bins, "Per-face quantization N (power of two, 2..256)");
    vox->add_option("--out", vox_out, "Output .vxl")->required();
    vox->add_option("--transfer", vox_transfer, "Transfer preset: coolwarm, viridis-ish, gray, white");
    vox->add_option("--budget", vox_budget, "Memory budget in bytes (0 = unlimited)");

    // precompute-ao
    auto* pao = app.add_subcommand("precompute-ao", "Store per-voxel spherical AO in a .vxl model");
    std::string pao_model, pao_out;
    AOParams pao_params = precompute_ao_defaults();
    pao->add_option("--model", pao_model, "Input .vxl")->required();
    pao->add_option("--rays", pao_params.n_rays, "Directions per voxel")->check(CLI::PositiveNumber);
    pao->add_option("--radius", pao_params.radius, "Radius of influence (voxels)")->check(CLI::PositiveNumber);
    pao->add_option("--step", pao_params.step, "Sampling step (voxels)")->check(CLI::PositiveNumber);
    pao->add_option("--out", pao_out, "Output .vxl (default: overwrite --model)");

    // render
    auto* ren = app.add_subcommand("render", "Render a frame to PPM or PNG");
    std::string ren_model, ren_camera, ren_size = "640x360", ren_out, ren_config;
    std::string ren_shadows, ren_ao, ren_neighbors, ren_opacity_mode;
    double ren_opacity = 1.0, ren_tau = 0.95, ren_radius = 0.25;
    double ren_azimuth = -35.0;
    bool ren_oracle = false, ren_no_joints = false;
    std::string ren_stats;
    ren->add_option("--model", ren_model, "Input .vxl")->required();
    ren->add_option("--camera", ren_camera, "px,py,pz,tx,ty,tz,fov (default: orbit view)");
    ren->add_option("--azimuth", ren_azimuth, "Orbit azimuth in degrees when --camera is absent");
    ren->add_option("--size", ren_size, "WxH");
    auto* o_opacity = ren->add_option("--opacity", ren_opacity, "Base opacity in (0,1]");
    auto* o_opacity_mode = ren->add_option("--opacity-mode", ren_opacity_mode, "constant | transfer | distance-scaled");
    auto* o_tau = ren->add_option("--tau", ren_tau, "Early termination threshold in (0,1]");
    auto* o_shadows = ren->add_option("--shadows", ren_shadows, "none | hard | replines | cone");
    auto* o_ao = ren->add_option("--ao", ren_ao, "none | hemisphere-geometry | density-rays | precomputed");
    auto* o_neighbors = ren->add_option("--neighbors", ren_neighbors, "on | off | auto");
    auto* o_radius = ren->add_option("--radius", ren_radius, "Tube radius in voxels, (0,1]");
    ren->add_flag("--no-joints", ren_no_joints, "Disable joint spheres");
    ren->add_option("--config", ren_config, "JSON file with RenderParams fields");
    ren->add_flag("--oracle", ren_oracle, "Use the brute-force reference renderer");
    ren->add_option("--stats", ren_stats, "Write frame statistics JSON here");
    ren->add_option("--out", ren_out, "Output image (.ppm or .png)")->required();

    // metrics
    auto* met = app.add_subcommand("metrics", "Geometric and memory metrics of a voxelization");
    std::string met_input, met_json;
    int met_grid = 128, met_bins = 32;
    met->add_option("--input", met_input, "Curve file or built-in scene name")->required();
    met->add_option("--grid", met_grid, "Voxels along the longest axis")->check(CLI::Range(1, 4096));
    met->add_option("--bins", met_bins, "Per-face quantization N");
    met->add_option("--json", met_json, "Output JSON (default: stdout)");

    // bench
    auto* ben = app.add_subcommand("bench", "Orbit the camera and report per-frame counters");
    std::string ben_model, ben_size = "640x360", ben_json, ben_neighbors = "on", ben_config;
    int ben_frames = 60;
    double ben_opacity = 1.0;
    ben->add_option("--model", ben_model, "Input .vxl")->required();
    ben->add_option("--frames", ben_frames, "Frames in one full orbit")->check(CLI::PositiveNumber);
    ben->add_option("--size", ben_size, "WxH");
    ben->add_option("--opacity", ben_opacity, "Base opacity");
    ben->add_option("--neighbors", ben_neighbors, "on | off | auto");
    ben->add_option("--config", ben_config, "JSON file with RenderParams fields");
    ben->add_option("--json", ben_json, "Output JSON (default: stdout)");

    // serve
    auto* srv = app.add_subcommand("serve", "Run the WebSocket render service and static viewer server");
    ServerOptions srv_opts;
    std::string srv_root, srv_scenes;
    int srv_divisor = 2;
    srv->add_option("--port", srv_opts.port, "WebSocket port");
    srv->add_option("--http-port", srv_opts.http_port, "Static viewer port");
    srv->add_option("--host", srv_opts.host, "Bind address");
    srv->add_option("--web-root", srv_root, "Viewer bundle directory");
    srv->add_option("--scenes", srv_scenes, "Directory for relative loadScene paths");
    srv->add_option("--size", ren_size, "Still-frame size WxH");
    srv->add_option("--moving-divisor", srv_divisor, "Resolution divisor while moving")->check(CLI::PositiveNumber);
    srv->add_option("--grid", vox_grid, "Grid for curve files and built-in scenes");
    srv->add_option("--bins", vox_bins, "Bins for curve files and built-in scenes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return 2;
    }

    const int threads = threads_from(threads_flag);
    try {
        if (*vox) {
            VoxelizeOptions o;
            o.grid = vox_grid;
            o.bins = vox_bins;
            o.threads = threads;
            o.memory_budget = vox_budget;
            o.transfer = TransferTable::preset(vox_transfer);
            BuildReport report;
            const bool builtin = vox_input == "tornado" || vox_input == "tornado-small";
            const CurveSet curves = builtin ? (vox_input == "tornado" ? generate_tornado(1000, 250, 42)
                                                                      : generate_tornado(200, 120, 7))
                                            : load_curves(vox_input);
            const Scene scene = voxelize_curves(curves, o, &report);
            save_vxl(scene, vox_out);
            const auto mem = memory_report(scene.model);
            out << "grid " << scene.model.spec.dims.x << 'x' << scene.model.spec.dims.y << 'x'
                << scene.model.spec.dims.z << ", N=" << scene.model.spec.bins << ", " << mem.segments
                << " segments, " << mem.total << " bytes (" << mem.bytes_per_segment << " per segment)";
            if (report.overflow_dropped) out << ", " << report.overflow_dropped << " dropped by the 255/voxel cap";
            out << '\n';
            return 0;
        }
        if (*pao) {
            Scene scene = load_model(pao_model, threads);
            scene.ao = precompute_voxel_ao(scene.model, scene.octree, pao_params, threads);
            save_vxl(scene, pao_out.empty() ? pao_model : pao_out);
            out << "precomputed AO for " << scene.model.voxel_count() << " voxels (" << pao_params.n_rays
                << " rays, radius " << pao_params.radius << ")\n";
            return 0;
        }
        if (*ren) {
            const auto [w, h] = parse_size(ren_size);
            const Scene scene = load_model(ren_model, threads);
            RenderParams p;
            if (!ren_config.empty()) apply_params_json(p, load_json_file(ren_config));
            if (o_opacity->count()) p.base_opacity = ren_opacity;
            if (o_opacity_mode->count()) p.opacity_mode = parse_opacity_mode(ren_opacity_mode);
            if (o_tau->count()) p.tau = ren_tau;
            if (o_shadows->count()) p.shadow_mode = parse_shadow_mode(ren_shadows);
            if (o_ao->count()) p.ao_mode = parse_ao_mode(ren_ao);
            if (o_neighbors->count()) p.neighbor_mode = parse_neighbor_mode(ren_neighbors);
            if (o_radius->count()) p.tube_radius = ren_radius;
            if (ren_no_joints) p.joint_spheres = false;
            p.validate();
            const Camera cam = ren_camera.empty() ? orbit_camera(scene.model.spec, ren_azimuth, w, h)
                                                  : parse_camera(ren_camera, w, h);
            RenderOptions ro;
            ro.threads = threads;
            const Frame frame = ren_oracle ? brute_force_render(cam, scene, p, threads) : render_frame(cam, scene, p, ro);
            write_image(frame.image, ren_out);
            const json stats{{"ms", frame.stats.ms},
                             {"rays", frame.stats.rays},
                             {"voxel_steps", frame.stats.voxel_steps},
                             {"intersection_tests", frame.stats.intersection_tests},
                             {"composited", frame.stats.composited},
                             {"id_suppressed", frame.stats.id_suppressed},
                             {"params", params_to_json(p)}};
            if (!ren_stats.empty()) write_json(stats, ren_stats, out);
            out << "wrote " << ren_out << " (" << w << 'x' << h << ", " << frame.stats.ms << " ms, "
                << frame.stats.intersection_tests << " tests)\n";
            return 0;
        }
        if (*met) {
            VoxelizeOptions o;
            o.grid = met_grid;
            o.bins = met_bins;
            o.threads = threads;
            const bool builtin = met_input == "tornado" || met_input == "tornado-small";
            const CurveSet curves = builtin ? (met_input == "tornado" ? generate_tornado(1000, 250, 42)
                                                                      : generate_tornado(200, 120, 7))
                                            : load_curves(met_input);
            CurveSet normalized;
            BuildReport report;
            const Scene scene = voxelize_curves(curves, o, &report, &normalized);
            const auto hd = mean_hausdorff(normalized, scene.model, 0.1, threads);
            const auto td = mean_tangent_deviation(normalized, scene.model, 0.1, threads);
            const auto mem = memory_report(scene.model);
            const json j{
                {"input", met_input},
                {"grid", {scene.model.spec.dims.x, scene.model.spec.dims.y, scene.model.spec.dims.z}},
                {"bins", scene.model.spec.bins},
                {"units", "voxel edge length"},
                {"curves", curves.curves.size()},
                {"segments", scene.model.segment_count()},
                {"duplicate_rate", count_duplicates(scene.model)},
                {"overflow_dropped", report.overflow_dropped},
                {"hausdorff", {{"mean", hd.mean}, {"max", hd.max}, {"curves", hd.curves}, {"skipped", hd.skipped}}},
                {"tangent_deviation_deg", {{"mean", td.mean_deg}, {"samples", td.samples}, {"skipped", td.skipped}}},
                {"memory",
                 {{"header_bytes", mem.header_bytes},
                  {"segment_bytes", mem.segment_bytes},
                  {"total", mem.total},
                  {"bytes_per_segment", mem.bytes_per_segment}}},
            };
            write_json(j, met_json, out);
            return 0;
        }
        if (*ben) {
            const auto [w, h] = parse_size(ben_size);
            const Scene scene = load_model(ben_model, threads);
            RenderParams p;
            if (!ben_config.empty()) apply_params_json(p, load_json_file(ben_config));
            p.base_opacity = ben_opacity;
            p.neighbor_mode = parse_neighbor_mode(ben_neighbors);
            p.validate();
            RenderOptions ro;
            ro.threads = threads;
            json frames = json::array();
            double total_ms = 0.0;
            for (int i = 0; i < ben_frames; ++i) {
                const Camera cam = orbit_camera(scene.model.spec, 360.0 * i / ben_frames, w, h);
                const Frame f = render_frame(cam, scene, p, ro);
                total_ms += f.stats.ms;
                frames.push_back({{"frame", i},
                                  {"ms", f.stats.ms},
                                  {"voxel_steps", f.stats.voxel_steps},
                                  {"intersection_tests", f.stats.intersection_tests},
                                  {"composited", f.stats.composited}});
            }
            const json j{{"model", ben_model},
                         {"size", {w, h}},
                         {"threads", threads > 0 ? threads : resolve_threads(0)},
                         {"params", params_to_json(p)},
                         {"mean_ms", total_ms / ben_frames},
                         {"frames", frames}};
            write_json(j, ben_json, out);
            return 0;
        }
        if (*srv) {
            const auto [w, h] = parse_size(ren_size);
            srv_opts.web_root = srv_root;
            srv_opts.session.width = w;
            srv_opts.session.height = h;
            srv_opts.session.moving_divisor = srv_divisor;
            srv_opts.session.threads = threads;
            srv_opts.session.voxelize.grid = vox_grid;
            srv_opts.session.voxelize.bins = vox_bins;
            srv_opts.session.voxelize.threads = threads;
            srv_opts.session.scene_root = srv_scenes;
            Server server(srv_opts);
            server.start();
            out << "render service on ws://" << srv_opts.host << ':' << server.port() << ", viewer on http://"
                << srv_opts.host << ':' << server.http_port() << std::endl;
            g_interrupted = 0;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            server.stop();
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace linevox
