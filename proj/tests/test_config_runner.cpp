#include <catch_amalgamated.hpp>

#include "birkhoff/config.hpp"
#include "birkhoff/runner.hpp"
#include "generators.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace birkhoff;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) { return std::string(BIRKHOFF_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("birkhoff_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig random_config(gen::Rng& rng) {
    RunConfig c;
    c.scenario.name = rng.integer(0, 1) ? "lv2" : "may_leonard";
    if (rng.integer(0, 1)) c.scenario.params["r1"] = rng.uniform(0.5, 2.0);
    c.cone.eta = rng.uniform(0.0, 1e-6);
    c.pipeline.depths = {rng.integer(1, 3), rng.integer(4, 8)};
    c.pipeline.map_time = rng.uniform(0.1, 3.0);
    c.pipeline.samples_per_box = rng.integer(1, 20);
    c.pipeline.padding_mode = rng.integer(0, 1) ? "fixed" : "lipschitz";
    c.pipeline.theta = rng.uniform(0.0, 0.1);
    c.pipeline.ip_generators = rng.integer(1, 12);
    c.pipeline.cell_side = rng.integer(0, 1) ? "upper" : "lower";
    c.pipeline.cell_center = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    c.pipeline.entropy_epsilons = {rng.uniform(0.01, 0.05), rng.uniform(0.05, 0.2)};
    c.run.seed = static_cast<std::uint64_t>(rng.integer(0, 1 << 30));
    return c;
}

}  // namespace

TEST_CASE("shipped configurations parse", "[config]") {
    const RunConfig c = load_config(config_path("default.ini"));
    CHECK(c.scenario.name == "lv_cycle");
    CHECK(c.pipeline.depths == std::vector<int>{3, 4, 5, 6});
    CHECK(c.pipeline.cell_nodes == std::vector<int>{31, 31});
    CHECK(c.run.seed == 1);
    CHECK(build_scenario(c).dimension() == 3);
    CHECK(build_cone(c, 3).dimension() == 3);

    const RunConfig ml = load_config(config_path("may_leonard.ini"));
    CHECK(ml.pipeline.compare_target == "plus_infinity");
    CHECK_NOTHROW(load_config(config_path("bistable2.ini")));
}

TEST_CASE("configurations survive a serialize round trip", "[config][property]") {
    gen::Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const RunConfig c = random_config(rng);
        const RunConfig back = parse_config(serialize_config(c));
        CHECK(back == c);
        CHECK(serialize_config(back) == serialize_config(c));
    }
}

TEST_CASE("malformed configurations are rejected", "[config]") {
    CHECK_THROWS_AS(parse_config("[scenario]\nnmae = lv2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[solver]\nsteps = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("seed = 3\n[run]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[pipeline]\ndepths = 4,3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[pipeline]\nmap_time = fast\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[pipeline]\ncell_target = somewhere\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[scenario]\nparams = r1\n"), ConfigError);
    CHECK_THROWS_AS(load_config(config_path("missing.ini")), ConfigError);

    RunConfig c;
    c.scenario.name = "lorenz";
    CHECK_THROWS_AS(build_scenario(c), ConfigError);
    c.cone.matrix = "1,0;0";
    CHECK_THROWS_AS(build_cone(c, 2), ConfigError);
    c.cone.matrix = "1,2;2,4";
    CHECK_THROWS_AS(build_cone(c, 2), ConfigError);
}

TEST_CASE("runner exit codes", "[runner]") {
    std::ostringstream log;
    RunConfig c;
    c.scenario.name = "linear2";
    c.pipeline.depths = {3, 4};
    c.pipeline.cell_nodes = {5};
    c.pipeline.cell_half_width = {0.1};
    c.pipeline.cell_center = {0.0};

    CHECK(run("bogus", c, scratch("bogus").string(), log) == kExitConfig);

    RunConfig bad_cone = c;
    bad_cone.cone.matrix = "1,0;0";
    CHECK(run("classify", bad_cone, scratch("bad_cone").string(), log) == kExitConfig);
    CHECK(log.str().find("error") != std::string::npos);

    const fs::path out = scratch("recurrent");
    CHECK(run("recurrent", c, out.string(), log) == kExitPass);
    for (const char* f : {"equilibria.csv", "cover.csv", "edges.txt", "subdivision.csv", "components.txt"}) {
        CHECK(fs::exists(out / f));
    }
    CHECK(read_file(out / "cover.csv").rfind("depth,index,cx1,cx2,r1,r2,flags\n", 0) == 0);
}

TEST_CASE("a non-competitive cone makes classify report violations", "[runner]") {
    RunConfig c = load_config(config_path("default.ini"));
    c.cone.matrix = "1,0,0;0,-1,0;0,0,1";
    std::ostringstream log;
    const fs::path out = scratch("straddle");
    CHECK(run("classify", c, out.string(), log) == kExitViolation);
    CHECK(fs::exists(out / "audits.txt"));
}
