#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "linevox/voxelizer.hpp"

using namespace linevox;

namespace {

GridSpec grid(int x, int y, int z, int bins = 32) {
    GridSpec g;
    g.dims = {x, y, z};
    g.bins = bins;
    return g;
}

}  // namespace

TEST_CASE("clip: axis-aligned crossing drops the end pieces") {
    const auto c = testing::make_curve({{0.5, 0.5, 0.5}, {2.5, 0.5, 0.5}});
    const auto pieces = clip_curve_to_voxels(c, grid(3, 3, 3));
    REQUIRE(pieces.size() == 1);
    CHECK(pieces[0].cell == Int3{1, 0, 0});
    CHECK(pieces[0].entry == Vec3{1, 0.5, 0.5});
    CHECK(pieces[0].exit == Vec3{2, 0.5, 0.5});
}

TEST_CASE("clip: same-voxel curves emit nothing") {
    const auto c = testing::make_curve({{0.2, 0.2, 0.2}, {0.8, 0.7, 0.1}, {0.5, 0.5, 0.5}});
    CHECK(clip_curve_to_voxels(c, grid(3, 3, 3)).empty());
}

TEST_CASE("clip: attributes interpolate to crossing points") {
    Curve c;
    c.points = {{0.5, 0.5, 0.5}, {3.5, 0.5, 0.5}};
    c.attrs = {0.0f, 1.0f};
    const auto pieces = clip_curve_to_voxels(c, grid(4, 1, 1));
    REQUIRE(pieces.size() == 2);
    CHECK(pieces[0].attr_in == doctest::Approx(1.0 / 6));
    CHECK(pieces[0].attr_out == doctest::Approx(0.5));
    CHECK(pieces[1].attr_out == doctest::Approx(5.0 / 6));
}

TEST_CASE("clip: chaining and containment on random curves") {
    const auto set = normalize_to_grid(testing::random_curves(40, 30, 10.0, 17), grid(12, 12, 12));
    const auto spec = grid(12, 12, 12);
    for (const auto& curve : set.curves) {
        const auto pieces = clip_curve_to_voxels(curve, spec);
        for (std::size_t j = 0; j < pieces.size(); ++j) {
            const Vec3 base = to_vec(pieces[j].cell);
            CHECK(owning_face(pieces[j].entry - base, 1e-9) >= 0);
            CHECK(owning_face(pieces[j].exit - base, 1e-9) >= 0);
            CHECK(spec.contains(pieces[j].cell));
            if (j + 1 < pieces.size()) CHECK(pieces[j].exit == pieces[j + 1].entry);
        }
    }
}

TEST_CASE("clip: edge crossings are merged, not split into zero-length pieces") {
    const auto c = testing::make_curve({{0.5, 0.5, 0.5}, {2.5, 2.5, 0.5}});
    const auto pieces = clip_curve_to_voxels(c, grid(3, 3, 1));
    REQUIRE(pieces.size() == 1);
    CHECK(pieces[0].cell == Int3{1, 1, 0});
    CHECK(pieces[0].entry == Vec3{1, 1, 0.5});
    const auto q = quantize_piece(pieces[0], 32);
    CHECK(q.face_in == 0);   // edge point: smallest face id among -x and -y
    CHECK(q.face_out == 1);  // +x before +y
}

TEST_CASE("build: single segment counting and memory") {
    const auto set = testing::make_set({testing::make_curve({{0.5, 0.5, 0.5}, {2.5, 0.5, 0.5}})});
    const auto spec = grid(3, 3, 3);
    const auto m = build_voxel_model(set, spec);
    CHECK(m.segment_count() == 1);
    CHECK(m.counts[spec.linear_index({1, 0, 0})] == 1);
    CHECK(m.memory_bytes() == 5 * 27 + 5);
    CHECK(count_duplicates(m) == 0.0);
    const auto s = m.segment(0);
    CHECK(s.chain_start);
    CHECK(s.face_in == 0);
    CHECK(s.face_out == 1);
}

TEST_CASE("build: two identical curves") {
    const auto c = testing::make_curve({{0.5, 0.5, 0.5}, {2.5, 0.5, 0.5}});
    const auto m = build_voxel_model(testing::make_set({c, c}), grid(3, 3, 3));
    const auto v = grid(3, 3, 3).linear_index({1, 0, 0});
    REQUIRE(m.counts[v] == 2);
    const auto a = m.segment(m.offsets[v]), b = m.segment(m.offsets[v] + 1);
    CHECK(a.local_line_id != b.local_line_id);
    CHECK(count_duplicates(m) == 0.5);
}

TEST_CASE("build: offsets are an exclusive prefix sum") {
    const auto spec = grid(10, 10, 10, 16);
    const auto set = normalize_to_grid(testing::random_curves(60, 25, 1.0, 2), spec);
    const auto m = build_voxel_model(set, spec);
    std::size_t sum = 0;
    for (std::size_t v = 0; v < m.voxel_count(); ++v) {
        CHECK(m.offsets[v] == sum);
        sum += m.counts[v];
    }
    CHECK(sum == m.segment_count());
    CHECK(m.origins.size() == m.segment_count());
}

TEST_CASE("build: parallel equals serial reference and is worker-count independent") {
    const auto spec = grid(24, 20, 16, 32);
    const auto set = normalize_to_grid(testing::random_curves(150, 40, 1.0, 8), spec);
    BuildReport r1, r2;
    const auto ref = build_voxel_model_reference(set, spec, {}, &r1);
    BuildOptions one, many;
    one.threads = 1;
    many.threads = 8;
    const auto a = build_voxel_model(set, spec, one, &r2);
    const auto b = build_voxel_model(set, spec, many);
    CHECK(a == ref);
    CHECK(b == ref);
    CHECK(a.origins.size() == ref.origins.size());
    CHECK(r1.pieces == r2.pieces);
}

TEST_CASE("build: per-voxel cap keeps the first 255") {
    std::vector<Curve> curves;
    for (int i = 0; i < 300; ++i) {
        const double y = 0.1 + 0.8 * i / 300.0;
        curves.push_back(testing::make_curve({{0.5, y, 0.5}, {2.5, y, 0.5}}, float(i) / 300.0f));
    }
    CurveSet set;
    set.curves = curves;
    set.recompute_bbox();
    BuildReport rep;
    const auto spec = grid(3, 1, 1);
    const auto m = build_voxel_model(set, spec, {}, &rep);
    CHECK(m.counts[1] == 255);
    CHECK(rep.overflow_dropped == 45);
    CHECK(rep.overflow_voxels == 1);
    CHECK(rep.id_collision_voxels == 1);
    // keep-first: the stored attrs are the lowest ones, in input order
    CHECK(m.segment(0).attr_index == attr_to_index(0.0f));
    CHECK(m.segment(254).attr_index == attr_to_index(254.0f / 300.0f));
    CHECK(m == build_voxel_model_reference(set, spec));
}

TEST_CASE("build: errors") {
    const auto set = testing::make_set({testing::make_curve({{0.5, 0.5, 0.5}, {2.5, 0.5, 0.5}})});
    CHECK_THROWS_AS(build_voxel_model(set, grid(0, 3, 3)), std::invalid_argument);
    BuildOptions opts;
    opts.memory_budget = 100;
    CHECK_THROWS_AS(build_voxel_model(set, grid(3, 3, 3), opts), BudgetError);
}

TEST_CASE("build: reconstructed endpoints lie on faces, quantization error bounded") {
    const auto spec = grid(16, 16, 16, 8);
    const auto set = normalize_to_grid(testing::random_curves(50, 30, 1.0, 21), spec);
    const auto m = build_voxel_model(set, spec);
    for (std::size_t v = 0; v < m.voxel_count(); ++v) {
        const Int3 cell = spec.cell_of(std::uint32_t(v));
        for (std::size_t k = 0; k < m.counts[v]; ++k) {
            const auto [a, b] = m.endpoints(cell, m.segment(m.offsets[v] + k));
            CHECK(owning_face(a - to_vec(cell), 1e-12) >= 0);
            CHECK(owning_face(b - to_vec(cell), 1e-12) >= 0);
        }
    }
    for (std::size_t c = 0; c < set.curves.size(); ++c)
        for (const auto& piece : clip_curve_to_voxels(set.curves[c], spec)) {
            const auto q = quantize_piece(piece, spec.bins);
            const Vec3 base = to_vec(piece.cell);
            CHECK(max_abs_component(base + bin_center(q.face_in, q.bin_in, 8) - piece.entry) <= 0.5 / 8 + 1e-12);
            CHECK(max_abs_component(base + bin_center(q.face_out, q.bin_out, 8) - piece.exit) <= 0.5 / 8 + 1e-12);
        }
}

TEST_CASE("duplicates: one curve has none, coarse bins add some") {
    const auto one = testing::make_set({testing::make_curve({{0.5, 0.5, 0.5}, {5.5, 3.5, 2.5}})});
    CHECK(count_duplicates(build_voxel_model(one, grid(8, 8, 8))) == 0.0);

    const auto set = generate_tornado(150, 120, 5);
    const auto fine_spec = GridSpec::fit(set.bbox, 64, 32);
    const auto coarse_spec = GridSpec::fit(set.bbox, 64, 2);
    const double fine = count_duplicates(build_voxel_model(normalize_to_grid(set, fine_spec), fine_spec));
    const double coarse = count_duplicates(build_voxel_model(normalize_to_grid(set, coarse_spec), coarse_spec));
    CHECK(coarse > fine);
}
