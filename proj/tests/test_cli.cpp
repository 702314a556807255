#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "padam/pde.hpp"
#include "padam/pgm.hpp"
#include "padam/run_config.hpp"

using namespace padam;

namespace {

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PADAM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("run config defaults, overrides, and rejection of unknown keys") {
    RunConfig cfg;
    CHECK(cfg.get("sampler.steps") == "64");
    CHECK(cfg.get_double("conformal.alpha") == doctest::Approx(0.05));
    CHECK(cfg.get_int("conformal.members") == 6);
    CHECK(cfg.get_int("conformal.n_cal") == 50);
    CHECK(cfg.get_bool("guidance.hard_replace"));

    cfg.set("sampler.steps", "128");
    CHECK(cfg.get_int("sampler.steps") == 128);
    CHECK_THROWS_AS(cfg.set("sampler.bogus", "1"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.get("nope.nope"), std::invalid_argument);
}

TEST_CASE("config parsing: sections, comments, malformed lines") {
    RunConfig cfg = RunConfig::from_text("# comment\n[sampler]\nsteps = 32\nrho=5\n");
    CHECK(cfg.get_int("sampler.steps") == 32);
    CHECK(cfg.get_double("sampler.rho") == doctest::Approx(5.0));

    CHECK_THROWS(RunConfig::from_text("steps = 32\n"));           // key outside section
    CHECK_THROWS(RunConfig::from_text("[sampler]\nsteps 32\n"));  // missing '='
    CHECK_THROWS(RunConfig::from_text("[sampler]\nbogus = 1\n")); // unknown key
}

TEST_CASE("config hash is stable and sensitive") {
    RunConfig a, b;
    CHECK(a.hash() == b.hash());
    b.set("sampler.steps", "65");
    CHECK(a.hash() != b.hash());
    CHECK(a.hash().size() == 16);
}

TEST_CASE("pgm writer emits a valid P5 header and payload") {
    Grid2D g = unit_grid(16, BoundaryTag::neumann);
    Field f = gaussian_bump_ic(g, 0.5, 0.5, 0.05);
    const std::string path = tmp_path("padam_test.pgm");
    write_pgm(f, 0, path);

    const std::string bytes = slurp(path);
    CHECK(bytes.substr(0, 3) == "P5\n");
    CHECK(bytes.find("16 16") != std::string::npos);
    // Header + 256 pixel bytes.
    const auto header_end = bytes.find("255\n") + 4;
    CHECK(bytes.size() - header_end == 256);
}

TEST_CASE("cli: usage errors exit with code 2") {
    CHECK(run_cli("definitely-not-a-command") == 2);
    CHECK(run_cli("infer --task forward") == 2); // missing required flags
    CHECK(run_cli("gen-data --investigation nope --out /tmp/x.padm") == 2);
    CHECK(run_cli("gen-data --n-per-class 0 --out /tmp/x.padm") == 2);
}

TEST_CASE("cli: format errors exit with code 3") {
    const std::string bad = tmp_path("padam_cli_bad.padm");
    std::ofstream(bad, std::ios::binary) << "NOTPADM";
    CHECK(run_cli("infer --task forward --class diffusion --dataset " + bad +
                  " --out /tmp/padam_cli_x.csv") == 3);
}

TEST_CASE("cli: gen-data round is reproducible byte for byte") {
    const std::string p1 = tmp_path("padam_cli_a.padm");
    const std::string p2 = tmp_path("padam_cli_b.padm");
    const std::string flags =
        " --investigation unified --n-per-class 3 --solver-nx 32 --prior-nx 16 --seed 11 --out ";
    REQUIRE(run_cli("gen-data" + flags + p1) == 0);
    REQUIRE(run_cli("gen-data" + flags + p2) == 0);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("cli: infer produces deterministic csv with config hash") {
    const std::string data = tmp_path("padam_cli_data.padm");
    REQUIRE(run_cli("gen-data --investigation unified --n-per-class 8 --solver-nx 32 "
                    "--prior-nx 16 --seed 11 --out " +
                    data) == 0);

    const std::string c1 = tmp_path("padam_cli_r1.csv");
    const std::string c2 = tmp_path("padam_cli_r2.csv");
    const std::string flags = " --task forward --class diffusion --fraction 0.5 --instances 2 "
                              "--held-in --seed 21 --dataset " +
                              data + " --out ";
    REQUIRE(run_cli("infer" + flags + c1) == 0);
    REQUIRE(run_cli("infer" + flags + c2) == 0);
    const std::string body = slurp(c1);
    CHECK(body == slurp(c2));
    CHECK(body.find("metric,name,class,task,fraction,value,seed,config_hash") == 0);
    CHECK(body.find("rel_l2") != std::string::npos);

    // The manifest records the config and the seed.
    const std::string manifest = slurp(c1 + ".manifest");
    CHECK(manifest.find("config_hash=") != std::string::npos);
    CHECK(manifest.find("seed=21") != std::string::npos);
}
