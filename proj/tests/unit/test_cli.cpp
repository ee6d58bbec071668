#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "../../tools/cli.hpp"
#include "helpers.hpp"
#include "linevox/image.hpp"
#include "linevox/model_io.hpp"

using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "linevox");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = linevox::run_cli(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string write_obj() {
    const auto path = testing::temp_path("cli_scene.obj");
    std::ofstream f(path);
    f << "v 0 0 0\n# attr 0.2\nv 4 1 1\n# attr 0.8\nv 6 3 2\nl 1 2 3\n"
         "v 1 3 0\nv 5 0 2\nl 4 5\n";
    return path.string();
}

std::string voxelized() {
    const auto vxl = testing::temp_path("cli_scene.vxl").string();
    const auto r = cli({"voxelize", "--input", write_obj(), "--grid", "24", "--bins", "16", "--out", vxl});
    REQUIRE(r.code == 0);
    return vxl;
}

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"render", "--out", "x.ppm"}).code == 2);
    const auto r = cli({"frobnicate"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("cli: voxelize then render writes an image") {
    const auto vxl = voxelized();
    const auto scene = linevox::load_vxl(vxl);
    CHECK(scene.model.spec.bins == 16);
    CHECK(scene.model.segment_count() > 0);

    const auto ppm = testing::temp_path("cli_render.ppm").string();
    const auto stats = testing::temp_path("cli_render.json").string();
    const auto r = cli({"render", "--model", vxl, "--size", "40x30", "--opacity", "0.5", "--shadows", "cone", "--ao",
                        "density-rays", "--out", ppm, "--stats", stats, "--threads", "1"});
    REQUIRE(r.code == 0);
    const auto img = linevox::read_ppm(ppm);
    CHECK(img.width == 40);
    CHECK(img.height == 30);
    std::ifstream sf(stats);
    const auto j = json::parse(sf);
    CHECK(j["rays"] == 1200);
    CHECK(j["params"]["shadow_mode"] == "cone");

    // the oracle path produces the same image for the default (opaque) parameters
    const auto a = testing::temp_path("cli_a.ppm").string(), b = testing::temp_path("cli_b.ppm").string();
    REQUIRE(cli({"render", "--model", vxl, "--size", "24x16", "--out", a}).code == 0);
    REQUIRE(cli({"render", "--model", vxl, "--size", "24x16", "--oracle", "--out", b}).code == 0);
    CHECK(linevox::read_ppm(a) == linevox::read_ppm(b));
}

TEST_CASE("cli: render rejects bad option values") {
    const auto vxl = voxelized();
    const auto out = testing::temp_path("cli_bad.ppm").string();
    CHECK(cli({"render", "--model", vxl, "--shadows", "soft", "--out", out}).code != 0);
    CHECK(cli({"render", "--model", vxl, "--size", "40by30", "--out", out}).code != 0);
    CHECK(cli({"render", "--model", vxl, "--tau", "0", "--out", out}).code != 0);
    CHECK(cli({"render", "--model", "/nonexistent.vxl", "--out", out}).code == 1);
}

TEST_CASE("cli: config file fields apply and flags override them") {
    const auto vxl = voxelized();
    const auto cfg = testing::temp_path("cli_cfg.json");
    std::ofstream(cfg) << R"({"base_opacity": 0.3, "tube_radius": 0.4})";
    const auto stats = testing::temp_path("cli_cfg_stats.json").string();
    const auto r = cli({"render", "--model", vxl, "--size", "16x16", "--config", cfg.string(), "--radius", "0.2",
                        "--out", testing::temp_path("cli_cfg.ppm").string(), "--stats", stats});
    REQUIRE(r.code == 0);
    std::ifstream sf(stats);
    const auto j = json::parse(sf);
    CHECK(j["params"]["base_opacity"] == doctest::Approx(0.3));
    CHECK(j["params"]["tube_radius"] == doctest::Approx(0.2));
}

TEST_CASE("cli: bench reports one record per frame") {
    const auto vxl = voxelized();
    const auto r = cli({"bench", "--model", vxl, "--frames", "60", "--size", "16x12", "--threads", "1"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    REQUIRE(j["frames"].size() == 60);
    CHECK(j["frames"][59]["frame"] == 59);
    CHECK(j["mean_ms"].get<double>() >= 0.0);
}

TEST_CASE("cli: metrics json") {
    const auto r = cli({"metrics", "--input", write_obj(), "--grid", "24", "--bins", "16"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["bins"] == 16);
    CHECK(j["memory"]["bytes_per_segment"] == 5);
    CHECK(j["hausdorff"]["max"].get<double>() <= std::sqrt(3.0));
    CHECK(j["units"] == "voxel edge length");
}

TEST_CASE("cli: precompute-ao stores a field") {
    const auto vxl = voxelized();
    const auto out = testing::temp_path("cli_ao.vxl").string();
    REQUIRE(cli({"precompute-ao", "--model", vxl, "--rays", "20", "--out", out}).code == 0);
    const auto scene = linevox::load_vxl(out);
    REQUIRE_FALSE(scene.ao.empty());
    CHECK(scene.ao.values.dims == scene.model.spec.dims);
    const auto png = testing::temp_path("cli_ao.ppm").string();
    CHECK(cli({"render", "--model", out, "--size", "16x16", "--ao", "precomputed", "--out", png}).code == 0);
    CHECK(cli({"render", "--model", vxl, "--size", "16x16", "--ao", "precomputed", "--out", png}).code == 1);
}
