// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/helpers.hpp"
#include "linevox/illumination.hpp"
#include "linevox/metrics.hpp"
#include "linevox/oracle.hpp"
#include "linevox/pipeline.hpp"
#include "linevox/render.hpp"

using namespace linevox;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

struct TestCase {
    std::string name;
    std::string intent;
    std::function<void(Outcome&)> run;
};

// Tornado at 256^3 with N=32, shared by the oracle, tau and performance criteria.
struct Tornado {
    Scene scene;
    Camera camera;
    double build_s = 0.0;

    static Tornado& get() {
        static std::unique_ptr<Tornado> t;
        if (!t) {
            t = std::make_unique<Tornado>();
            const auto t0 = Clock::now();
            GridSpec spec;
            spec.dims = {256, 256, 256};
            spec.bins = 32;
            const CurveSet curves = normalize_to_grid(generate_tornado(1000, 250, 42), spec);
            t->scene.model = build_voxel_model(curves, spec);
            t->scene.prepare();
            t->camera = orbit_camera(spec, -35.0, 640, 360);
            t->build_s = seconds_since(t0);
        }
        return *t;
    }
};

struct TimedFrame {
    Frame frame;
    double seconds = 0.0;
};

TimedFrame timed(const std::function<Frame()>& f) {
    const auto t0 = Clock::now();
    TimedFrame r{f(), 0.0};
    r.seconds = seconds_since(t0);
    return r;
}

RenderParams tornado_params(double opacity) {
    RenderParams p;
    p.neighbor_mode = NeighborMode::on;
    p.base_opacity = opacity;
    return p;
}

// Opaque ray-cast and oracle frames, reused by the performance criterion.
struct OpaquePair {
    TimedFrame cast, oracle;
};
std::optional<OpaquePair> g_opaque;

const OpaquePair& opaque_pair() {
    if (!g_opaque) {
        const Tornado& t = Tornado::get();
        const RenderParams p = tornado_params(1.0);
        OpaquePair pair;
        pair.cast = timed([&] { return render_frame(t.camera, t.scene, p); });
        pair.oracle = timed([&] { return brute_force_render(t.camera, t.scene, p); });
        g_opaque = std::move(pair);
    }
    return *g_opaque;
}

void memory_layout(Outcome& o) {
    const int expected[] = {0, 0, 4, 4, 5, 5, 6, 6};  // by log2 N
    for (int log2n = 2; log2n <= 7; ++log2n) {
        o.expect(record_width(log2n) == expected[log2n], "record width for N=" + std::to_string(1 << log2n));
        // the widest packed segment fits exactly in the record
        QuantizedSegment s;
        s.face_in = 5;
        s.face_out = 5;
        s.bin_in = s.bin_out = (1u << (2 * log2n)) - 1;
        s.attr_index = 255;
        s.local_line_id = 31;
        s.chain_start = true;
        std::vector<std::uint8_t> buf(std::size_t(record_width(log2n)));
        pack_segment(s, log2n, buf);
        o.expect(unpack_segment(buf, log2n) == s, "pack round trip for N=" + std::to_string(1 << log2n));
    }
    o.expect(kHeaderBytes == 5, "5-byte voxel header");
    for (int bins : {4, 8, 16, 32, 64, 128}) {
        GridSpec spec;
        spec.dims = {20, 12, 9};
        spec.bins = bins;
        const auto model = build_voxel_model(normalize_to_grid(testing::random_curves(60, 30, 1.0, 7), spec), spec);
        const auto r = memory_report(model);
        const std::size_t width = std::size_t(record_width(spec.log2_bins()));
        o.expect(r.total == 5 * model.voxel_count() + width * model.segment_count(),
                 "memory total for N=" + std::to_string(bins));
        o.expect(r.total == model.memory_bytes(), "memory_bytes agrees");
    }
    o.detail << "widths 4/5/6 for N 4-8/16-32/64-128, totals 5V + w*S";
}

void oracle_equivalence(Outcome& o) {
    const Tornado& t = Tornado::get();
    const OpaquePair& op = opaque_pair();
    const auto a = image_compare(op.cast.frame.image, op.oracle.frame.image);

    const RenderParams semi = tornado_params(0.25);
    const Frame cast = render_frame(t.camera, t.scene, semi);
    const Frame oracle = brute_force_render(t.camera, t.scene, semi);
    const auto b = image_compare(cast.image, oracle.image);

    o.expect(a.within_2 >= 0.999 && a.max_diff <= 8, "opaque");
    o.expect(b.within_2 >= 0.999 && b.max_diff <= 8, "alpha 0.25");
    o.detail << "opaque: within2 " << a.within_2 * 100 << "% max " << a.max_diff << "; alpha 0.25: within2 "
             << b.within_2 * 100 << "% max " << b.max_diff << " (segments " << t.scene.model.segment_count() << ")";
}

// Smooth random curves in grid space: unit steps with a slowly turning direction, reflected at
// the walls so no voxel collects more than the per-voxel cap.
CurveSet smooth_random_curves(int n, int steps, double size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(2.0, size - 2.0);
    std::normal_distribution<double> turn(0.0, 0.3);
    std::uniform_real_distribution<float> attr(0.0f, 1.0f);
    CurveSet set;
    for (int c = 0; c < n; ++c) {
        Curve curve;
        Vec3 p{pos(rng), pos(rng), pos(rng)};
        Vec3 d = normalize(Vec3{turn(rng), turn(rng), turn(rng)} + Vec3{1e-3, 0, 0});
        for (int i = 0; i < steps; ++i) {
            curve.points.push_back(p);
            curve.attrs.push_back(attr(rng));
            d = normalize(d + Vec3{turn(rng), turn(rng), turn(rng)});
            p += d;
            for (int a = 0; a < 3; ++a) {
                if (p[a] < 0.5) p[a] = 1.0 - p[a], d[a] = -d[a];
                if (p[a] > size - 0.5) p[a] = 2.0 * (size - 0.5) - p[a], d[a] = -d[a];
            }
        }
        set.curves.push_back(std::move(curve));
    }
    set.recompute_bbox();
    return set;
}

void geometric_bound(Outcome& o) {
    GridSpec spec;
    spec.dims = {48, 48, 48};
    spec.bins = 32;
    const CurveSet curves = smooth_random_curves(200, 300, 48.0, 2024);
    BuildReport report;
    const auto model = build_voxel_model(curves, spec, {}, &report);
    o.expect(report.overflow_dropped == 0, "no voxel overflow (the bound assumes every piece is kept)");
    const auto hd = mean_hausdorff(curves, model, 0.05);
    o.expect(hd.max <= std::sqrt(3.0), "max Hausdorff <= sqrt(3)");

    double worst = 0.0;
    for (const auto& c : curves.curves)
        for (const auto& piece : clip_curve_to_voxels(c, spec)) {
            const auto q = quantize_piece(piece, spec.bins);
            const Vec3 base = to_vec(piece.cell);
            worst = std::max(worst, max_abs_component(base + bin_center(q.face_in, q.bin_in, spec.bins) - piece.entry));
            worst = std::max(worst, max_abs_component(base + bin_center(q.face_out, q.bin_out, spec.bins) - piece.exit));
        }
    o.expect(worst <= 0.5 / spec.bins, "endpoint error <= 0.5/N");
    o.detail << "max Hausdorff " << hd.max << " (mean " << hd.mean << ", " << hd.curves << " curves, "
             << report.overflow_dropped << " overflow drops), endpoint error " << worst << " <= " << 0.5 / spec.bins;
}

void duplicate_rate(Outcome& o) {
    const auto t0 = Clock::now();
    const double fine = count_duplicates(Tornado::get().scene.model);
    GridSpec coarse;
    coarse.dims = {64, 64, 64};
    coarse.bins = 4;
    const double rate_coarse =
        count_duplicates(build_voxel_model(normalize_to_grid(generate_tornado(1000, 250, 42), coarse), coarse));
    o.expect(fine < 0.001, "rate < 0.1% at 256^3/N=32");
    o.expect(rate_coarse > fine, "64^3/N=4 strictly higher");
    o.detail << "256^3/N=32: " << fine * 100 << "%, 64^3/N=4: " << rate_coarse * 100 << "% (" << seconds_since(t0)
             << " s excluding the shared build)";
}

void tau_bound(Outcome& o) {
    const Tornado& t = Tornado::get();
    RenderParams p95 = tornado_params(0.25), p100 = p95;
    p95.tau = 0.95;
    p100.tau = 1.0;
    const Vec3 light = normalize(t.camera.to_world(normalize(p95.light_camera)));
    double worst = 0.0;
    FrameStats stats;
    for (int y = 0; y < t.camera.height; ++y)
        for (int x = 0; x < t.camera.width; ++x) {
            const Ray ray = t.camera.primary_ray(x, y);
            const Rgba a = trace_ray(t.scene, p95, ray, light, true, stats);
            const Rgba b = trace_ray(t.scene, p100, ray, light, true, stats);
            worst = std::max({worst, double(std::abs(a.r - b.r)), double(std::abs(a.g - b.g)),
                              double(std::abs(a.b - b.b))});
        }
    o.expect(worst <= 0.05, "per-channel difference <= 0.05");
    o.detail << "max per-channel |tau=0.95 - tau=1| = " << worst << " over 640x360 at alpha 0.25";
}

void octree_conservation(Outcome& o) {
    std::mt19937_64 rng(50);
    std::uniform_int_distribution<int> any_dim(1, 64), pow2(0, 6);
    std::uniform_real_distribution<float> rho(0.0f, 3.0f);
    std::bernoulli_distribution occupied(0.3);
    int exact = 0, mean_checked = 0;
    double worst_rel = 0.0;
    for (int field = 0; field < 50; ++field) {
        // even fields: power-of-two sides (every parent has the same child count); odd: arbitrary sides
        const bool power_of_two = field % 2 == 0;
        Int3 d;
        for (int a = 0; a < 3; ++a) d[a] = power_of_two ? 1 << pow2(rng) : any_dim(rng);
        ScalarField f(d);
        for (auto& v : f.values) v = occupied(rng) ? rho(rng) : 0.0f;
        const auto tree = build_octree(f);

        bool ok = true;
        for (int l = 1; l < tree.level_count(); ++l) {
            const auto& fine = tree.level(l - 1);
            const auto& coarse = tree.level(l);
            for (int z = 0; z < coarse.dims.z; ++z)
                for (int y = 0; y < coarse.dims.y; ++y)
                    for (int x = 0; x < coarse.dims.x; ++x) {
                        double sum = 0.0;
                        int n = 0;
                        for (int k = 0; k < 8; ++k) {
                            const int fx = 2 * x + (k & 1), fy = 2 * y + (k >> 1 & 1), fz = 2 * z + (k >> 2);
                            if (fx >= fine.dims.x || fy >= fine.dims.y || fz >= fine.dims.z) continue;
                            sum += double(fine.at(fx, fy, fz));
                            ++n;
                        }
                        ok &= coarse.at(x, y, z) == float(sum / n);
                    }
        }
        exact += ok;

        if (power_of_two) {
            double mean0 = 0.0;
            for (float v : tree.level(0).values) mean0 += v;
            mean0 /= double(tree.level(0).values.size());
            const double root = tree.level(tree.level_count() - 1).at(0, 0, 0);
            const double rel = mean0 == 0.0 ? std::abs(root) : std::abs(root - mean0) / mean0;
            worst_rel = std::max(worst_rel, rel);
            ++mean_checked;
        }
    }
    o.expect(exact == 50, "every parent is the exact mean of its children");
    o.expect(worst_rel <= 1e-5, "global mean within 1e-5");
    o.detail << exact << "/50 fields exact per parent; global mean rel. error " << worst_rel << " over "
             << mean_checked << " power-of-two fields";
}

void illumination_properties(Outcome& o) {
    GridSpec spec;
    spec.dims = {24, 24, 24};
    spec.bins = 32;
    const Scene s = testing::scene_from(normalize_to_grid(testing::random_curves(150, 40, 24.0, 77), spec), spec.dims,
                                        32, TransferTable::preset("coolwarm", 0.4f));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 24.0);
    std::normal_distribution<double> n;
    const AOParams ao;
    const TubeStyle style;
    bool in_range = true, monotone = true;
    const auto range_ok = [](double v) { return v >= 0.0 && v <= 1.0; };

    std::vector<DensityOctree> scaled;
    for (float k : {1.0f, 1.5f, 2.0f, 4.0f}) {
        ScalarField f = s.octree.level(0);
        for (auto& v : f.values) v *= k;
        scaled.push_back(build_octree(f));
    }
    for (int i = 0; i < 300; ++i) {
        const Vec3 p{u(rng), u(rng), u(rng)};
        const Vec3 dir = normalize(Vec3{n(rng), n(rng), n(rng)});
        const Light light{Light::Kind::directional, dir};
        in_range &= range_ok(hard_shadow(p, dir, light, s.model, style, &s.occupancy));
        in_range &= range_ok(replines_shadow(p, dir, light, *s.replines.level(2), 32, 0.25));
        in_range &= range_ok(ao_hemisphere_geometry(p, dir, s.model, style, ao, &s.occupancy));
        in_range &= range_ok(ao_sphere_density(p, s.octree.level(0), ao));
        double prev_cone = -1.0, prev_rays = -1.0;
        for (const auto& t : scaled) {
            const double c = cone_soft_shadow(p, dir, t), r = ao_density_rays(p, dir, t, ao);
            in_range &= range_ok(c) && range_ok(r);
            monotone &= c >= prev_cone && r >= prev_rays;
            prev_cone = c;
            prev_rays = r;
        }
    }
    o.expect(in_range, "outputs in [0,1]");
    o.expect(monotone, "monotone under density scaling");

    const AOParams pre = precompute_ao_defaults();
    const AOField field = precompute_voxel_ao(s.model, s.octree, pre);
    double worst = 0.0;
    for (int z = 0; z < 24; ++z)
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x) {
                const Vec3 c{x + 0.5, y + 0.5, z + 0.5};
                worst = std::max(worst, std::abs(field.sample(c) - ao_sphere_density(c, s.octree.level(0), pre)));
            }
    o.expect(worst <= 1e-6, "precomputed AO equals direct computation at voxel centers");

    const auto variance = [&](int rays) {
        std::vector<double> v;
        for (std::uint64_t trial = 1; trial <= 20; ++trial) {
            AOParams p;
            p.n_rays = rays;
            p.radius = 4.0;  // a radius at which this scene does not saturate
            p.jitter = trial;
            v.push_back(ao_hemisphere_geometry({12, 12, 12}, {0, 0, 1}, s.model, style, p, &s.occupancy));
        }
        double mean = 0.0, var = 0.0;
        for (double x : v) mean += x / double(v.size());
        for (double x : v) var += (x - mean) * (x - mean) / double(v.size() - 1);
        o.expect(mean > 0.05 && mean < 0.95, "non-saturated AO sample point");
        return var;
    };
    const double v25 = variance(25), v2500 = variance(2500);
    o.expect(v25 > v2500, "variance at 25 rays exceeds 2500 rays");
    o.detail << "range ok, monotone ok, precompute max |diff| " << worst << ", variance 25 rays " << v25
             << " vs 2500 rays " << v2500;
}

void performance(Outcome& o) {
    const Tornado& t = Tornado::get();
    const OpaquePair& op = opaque_pair();
    const double test_ratio =
        double(op.oracle.frame.stats.intersection_tests) / double(std::max<std::uint64_t>(1, op.cast.frame.stats.intersection_tests));
    const double speedup = op.oracle.seconds / op.cast.seconds;
    RenderOptions one, eight;
    one.threads = 1;
    eight.threads = 8;
    const RenderParams p = tornado_params(0.25);
    const bool identical =
        render_frame(t.camera, t.scene, p, one).image == render_frame(t.camera, t.scene, p, eight).image &&
        render_frame(t.camera, t.scene, tornado_params(1.0), one).image == op.cast.frame.image;
    o.expect(test_ratio >= 10.0, ">= 10x fewer intersection tests");
    o.expect(speedup >= 5.0, ">= 5x faster");
    o.expect(identical, "1 vs 8 workers byte-identical");
    o.detail << "tests " << op.cast.frame.stats.intersection_tests << " vs " << op.oracle.frame.stats.intersection_tests
             << " (" << test_ratio << "x), time " << op.cast.seconds << " s vs " << op.oracle.seconds << " s ("
             << speedup << "x), 1 vs 8 workers identical: " << (identical ? "yes" : "no");
}

void gap_closure(Outcome& o) {
    // The bend sits exactly on a voxel face at a bin center, so the stored segments meet there.
    const double bc = 3.0 + 16.5 / 32.0;
    const Vec3 joint{4.0, bc, bc};
    const CurveSet set = testing::make_set({testing::make_curve({{1.5, bc, bc}, joint, joint + Vec3{0.9, 3.0, 0.0}})});
    const Scene s = testing::scene_from(set, {8, 8, 8}, 32);

    Camera cam;
    cam.position = joint + Vec3{0, 0, 6};
    cam.target = joint;
    cam.up = {0, 1, 0};
    cam.fov_deg = 10.0;
    cam.width = cam.height = 200;

    RenderParams p;
    p.background = {0, 1, 0, 1};
    const auto background_at_joint = [&](bool joints) {
        p.joint_spheres = joints;
        const Frame f = render_frame(cam, s, p);
        int background = 0, silhouette = 0;
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x) {
                const Ray r = cam.primary_ray(x, y);
                const Vec3 w = joint - r.origin;
                const double dist = length(w - r.dir * dot(w, r.dir));
                if (dist > 0.9 * p.tube_radius) continue;
                ++silhouette;
                const auto* px = f.image.pixel(x, y);
                background += px[0] == 0 && px[1] == 255 && px[2] == 0;
            }
        return std::pair{background, silhouette};
    };
    const auto [without, n] = background_at_joint(false);
    const int with = background_at_joint(true).first;
    o.expect(without > 0, "gap visible without joint spheres");
    o.expect(with == 0, "no background with joint spheres");
    o.detail << "background pixels within the joint silhouette (" << n << " px): without joints " << without
             << ", with joints " << with;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<TestCase> cases = {
        {"memory-layout", "record widths, 5-byte headers and memory totals", memory_layout},
        {"oracle-equivalence", "ray-caster matches the brute-force oracle on the tornado", oracle_equivalence},
        {"geometric-bound", "Hausdorff and endpoint quantization bounds", geometric_bound},
        {"duplicate-rate", "duplicate rate at fine and coarse resolution", duplicate_rate},
        {"tau-bound", "early termination changes pixels by at most 1 - tau", tau_bound},
        {"octree-conservation", "parents are means of children; global mean preserved", octree_conservation},
        {"illumination-properties", "ranges, monotonicity, precompute identity, variance", illumination_properties},
        {"performance", "fewer tests and faster than the oracle; deterministic", performance},
        {"gap-closure", "joint spheres close bends", gap_closure},
    };
    // optional arguments select criteria by name
    const std::vector<std::string> only(argv + 1, argv + argc);
    int failed = 0, ran = 0;
    for (const auto& tc : cases) {
        if (!only.empty() && std::find(only.begin(), only.end(), tc.name) == only.end()) continue;
        ++ran;
        Outcome o;
        const auto t0 = Clock::now();
        try {
            tc.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "]";
        }
        failed += !o.pass;
        std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", tc.name.c_str(), o.detail.str().c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
