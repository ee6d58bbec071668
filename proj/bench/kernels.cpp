// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include "linevox/illumination.hpp"
#include "linevox/pipeline.hpp"
#include "linevox/render.hpp"

using namespace linevox;

namespace {

struct Fixture {
    CurveSet curves;
    GridSpec spec;
    Scene scene;
    Camera camera;

    Fixture() {
        spec.dims = {96, 96, 96};
        spec.bins = 32;
        curves = normalize_to_grid(generate_tornado(300, 200, 42), spec);
        scene.model = build_voxel_model(curves, spec);
        scene.prepare();
        camera = orbit_camera(spec, -35.0, 320, 180);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_RenderSerial(benchmark::State& state) {
    const auto& f = fixture();
    RenderParams p;
    p.base_opacity = 0.3;
    for (auto _ : state) benchmark::DoNotOptimize(render_frame_serial(f.camera, f.scene, p));
}

void BM_RenderParallel(benchmark::State& state) {
    const auto& f = fixture();
    RenderParams p;
    p.base_opacity = 0.3;
    RenderOptions o;
    o.threads = int(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(render_frame(f.camera, f.scene, p, o));
}

void BM_BuildSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(build_voxel_model_reference(f.curves, f.spec));
}

void BM_BuildParallel(benchmark::State& state) {
    const auto& f = fixture();
    BuildOptions o;
    o.threads = int(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_voxel_model(f.curves, f.spec, o));
}

void BM_AoSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(precompute_voxel_ao_reference(f.scene.model, f.scene.octree, precompute_ao_defaults()));
}

void BM_AoParallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            precompute_voxel_ao(f.scene.model, f.scene.octree, precompute_ao_defaults(), int(state.range(0))));
}

}  // namespace

BENCHMARK(BM_RenderSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AoSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AoParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
