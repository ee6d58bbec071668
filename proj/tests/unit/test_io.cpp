#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "linevox/config.hpp"
#include "linevox/illumination.hpp"
#include "linevox/image.hpp"
#include "linevox/model_io.hpp"
#include "linevox/pipeline.hpp"

using namespace linevox;
using nlohmann::json;

namespace {

Scene sample_scene(bool with_ao) {
    GridSpec spec;
    spec.dims = {10, 7, 5};
    spec.bins = 16;
    auto s = testing::scene_from(normalize_to_grid(testing::random_curves(30, 20, 1.0, 12), spec), spec.dims, 16,
                                 TransferTable::preset("viridis-ish", 0.6f));
    if (with_ao) s.ao = precompute_voxel_ao(s.model, s.octree, {20, 3.0, 1.0, 0});
    return s;
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(std::uint8_t(v >> (8 * i)));
}

}  // namespace

TEST_CASE("vxl: round trip keeps model and derived fields") {
    const Scene s = sample_scene(true);
    const auto bytes = encode_vxl(s);
    const Scene back = decode_vxl(bytes);
    CHECK(back.model == s.model);
    CHECK(back.octree == s.octree);
    CHECK(back.replines == s.replines);
    CHECK(back.ao.values == s.ao.values);
    CHECK(back.model.origins.empty());
    CHECK(encode_vxl(back) == bytes);

    const auto path = testing::temp_path("roundtrip.vxl");
    save_vxl(s, path);
    CHECK(load_vxl(path).model == s.model);
}

TEST_CASE("vxl: byte layout of the fixed header") {
    const Scene s = sample_scene(false);
    const auto b = encode_vxl(s);
    CHECK(std::string(b.begin(), b.begin() + 4) == "VXL1");
    CHECK(b[4] == 10);
    CHECK(b[8] == 7);
    CHECK(b[12] == 5);
    CHECK(b[16] == 4);  // log2 N
    CHECK(b[17] == 5);  // record width
    const std::size_t fixed = 4 + 12 + 2 + 8 + 350 * 5 + s.model.records.size() + 256 * 16;
    CHECK(b.size() > fixed);  // derived chunks follow
}

TEST_CASE("vxl: corrupt inputs are rejected") {
    const auto bytes = encode_vxl(sample_scene(false));
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_vxl(bad_magic), FormatError);

    for (std::size_t cut : {std::size_t(3), std::size_t(20), std::size_t(200), bytes.size() - 1})
        CHECK_THROWS_AS(decode_vxl(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + long(cut))), FormatError);

    auto bad_width = bytes;
    bad_width[17] = 6;
    CHECK_THROWS_AS(decode_vxl(bad_width), FormatError);

    auto bad_offset = bytes;
    bad_offset[26 + 5 * 3 + 1] ^= 1;  // first-record field of voxel 3
    CHECK_THROWS_AS(decode_vxl(bad_offset), FormatError);

    auto overrun = bytes;
    for (char c : std::string("AOFD")) overrun.push_back(std::uint8_t(c));
    put_u64(overrun, 4);
    for (int i = 0; i < 4; ++i) overrun.push_back(0);
    CHECK_THROWS_AS(decode_vxl(overrun), FormatError);

    CHECK_THROWS_AS(load_vxl(testing::temp_path("does_not_exist.vxl")), std::runtime_error);
}

TEST_CASE("vxl: unknown chunks are skipped") {
    const Scene s = sample_scene(false);
    auto bytes = encode_vxl(s);
    for (char c : std::string("XTRA")) bytes.push_back(std::uint8_t(c));
    put_u64(bytes, 3);
    bytes.insert(bytes.end(), {1, 2, 3});
    const Scene back = decode_vxl(bytes);
    CHECK(back.model == s.model);
    CHECK(back.octree == s.octree);
}

TEST_CASE("config: partial update, unknown keys, round trip") {
    RenderParams p;
    apply_params_json(p, json{{"base_opacity", 0.25}, {"shadow_mode", "replines"}, {"ao", {{"n_rays", 9}}}});
    CHECK(p.base_opacity == 0.25);
    CHECK(p.shadow_mode == ShadowMode::replines);
    CHECK(p.ao.n_rays == 9);
    CHECK(p.ao.radius == RenderParams{}.ao.radius);

    const RenderParams before = p;
    CHECK_THROWS_AS(apply_params_json(p, json{{"opacity", 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_params_json(p, json{{"shadow_mode", "soft"}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_params_json(p, json{{"tau", 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_params_json(p, json{{"base_opacity", "high"}}), std::invalid_argument);
    CHECK(params_to_json(p) == params_to_json(before));  // failed updates leave p untouched

    RenderParams q;
    apply_params_json(q, params_to_json(p));
    CHECK(params_to_json(q) == params_to_json(p));

    const auto path = testing::temp_path("params.json");
    std::ofstream(path) << params_to_json(p).dump(2);
    CHECK(load_json_file(path) == params_to_json(p));
    std::ofstream(testing::temp_path("broken.json")) << "{\"tau\": ";
    CHECK_THROWS_AS(load_json_file(testing::temp_path("broken.json")), std::runtime_error);
}

TEST_CASE("images: ppm round trip, png signature") {
    Image img(5, 3);
    img.set(0, 0, {1, 0, 0, 1});
    img.set(4, 2, {0.5f, 0.25f, 1, 1});
    const auto path = testing::temp_path("img.ppm");
    write_ppm(img, path);
    const Image back = read_ppm(path);
    REQUIRE(back.width == 5);
    CHECK(back.pixel(0, 0)[0] == 255);
    CHECK(back.pixel(4, 2)[0] == 128);
    CHECK(back.pixel(4, 2)[1] == 64);
    CHECK(to_byte(-1.0f) == 0);
    CHECK(to_byte(2.0f) == 255);

    if (png_supported()) {
        const auto png = encode_png(img);
        REQUIRE(png.size() > 8);
        CHECK(png[1] == 'P');
        CHECK(png[2] == 'N');
        CHECK(png[3] == 'G');
    }
}

TEST_CASE("camera and size parsing") {
    const auto c = parse_camera("1,2,3,4,5,6,45", 64, 32);
    CHECK(c.position == Vec3{1, 2, 3});
    CHECK(c.target == Vec3{4, 5, 6});
    CHECK(c.fov_deg == 45);
    CHECK(c.width == 64);
    CHECK_THROWS_AS(parse_camera("1,2,3", 64, 32), std::invalid_argument);
    CHECK_THROWS_AS(parse_camera("1,2,3,1,2,3,45", 64, 32), std::invalid_argument);
    CHECK(parse_size("640x360") == std::pair{640, 360});
    CHECK_THROWS_AS(parse_size("640"), std::invalid_argument);
    CHECK_THROWS_AS(parse_size("0x10"), std::invalid_argument);
}

TEST_CASE("open_scene: files and errors") {
    VoxelizeOptions o;
    o.grid = 12;
    o.bins = 8;
    const auto obj = testing::temp_path("open.obj");
    std::ofstream(obj) << "v 0 0 0\nv 3 1 2\nv 5 0 1\nl 1 2 3\n";
    const Scene s = open_scene(obj.string(), o);
    CHECK(s.model.spec.bins == 8);
    CHECK(std::max({s.model.spec.dims.x, s.model.spec.dims.y, s.model.spec.dims.z}) == 12);
    CHECK_FALSE(s.octree.levels.empty());

    const auto vxl = testing::temp_path("open.vxl");
    save_vxl(s, vxl);
    CHECK(open_scene(vxl.string(), o).model == s.model);

    CHECK_THROWS(open_scene("no-such-scene", o));
    CHECK_THROWS(open_scene(testing::temp_path("missing.obj").string(), o));
}
