#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fsp/scenario.hpp"

using namespace fsp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ScenarioConfig config_from(const std::string& text) {
    const ParseResult r = parse_config(text);
    for (const auto& e : r.errors) MESSAGE(e.str());
    REQUIRE(r.ok());
    return *r.config;
}

const char* kCircularOrbit =
    "[scenario]\n"
    "name = geodesic\n"
    "seed = 1\n"
    "[metric]\n"
    "name = schwarzschild\n"
    "M = 1\n"
    "[initial]\n"
    "x = 0 6 1.5707963267948966 0\n"
    "U = circular\n"
    "[integrator]\n"
    "step = 0.05\n"
    "s_end = 653.0\n";

}  // namespace

TEST_CASE("circular-orbit scenario writes a trajectory with tiny norm drift") {
    ScenarioConfig cfg = config_from(kCircularOrbit);
    cfg.out_dir = "scenario_test_geo";
    const RunManifest man = run_scenario(cfg);
    REQUIRE(man.success);
    CHECK(man.results.at("norm_drift") < 1e-9);
    CHECK(man.results.at("trajectory_complete") == 1.0);

    // manifest lists every output with its true byte length, and is on disk
    const fs::path dir = cfg.out_dir;
    CHECK(fs::exists(dir / "manifest.json"));
    for (const auto& [name, bytes] : man.outputs) {
        REQUIRE(fs::exists(dir / name));
        CHECK(fs::file_size(dir / name) == bytes);
    }
    const std::string manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find("\"success\": true") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("fractal ensemble scenario is byte-reproducible under its seed") {
    const std::string text =
        "[scenario]\n"
        "name = fractal-ensemble\n"
        "seed = 42\n"
        "[metric]\n"
        "name = minkowski\n"
        "[initial]\n"
        "U = 1 0.3 0 0\n"
        "[integrator]\n"
        "step = 0.02\n"
        "s_end = 1.0\n"
        "[fractal]\n"
        "lambda_c = 1.0\n"
        "amplitude = 0.02\n"
        "[ensemble]\n"
        "n = 200\n"
        "fit_sizes = 50 100 200\n"
        "threads = 2\n";
    ScenarioConfig cfg = config_from(text);

    cfg.out_dir = "scenario_test_fa";
    const RunManifest m1 = run_scenario(cfg);
    REQUIRE(m1.success);
    cfg.out_dir = "scenario_test_fb";
    cfg.threads = 1;  // worker count must not change any output byte
    const RunManifest m2 = run_scenario(cfg);
    REQUIRE(m2.success);

    for (const auto& [name, bytes] : m1.outputs) {
        CHECK(slurp(fs::path("scenario_test_fa") / name) ==
              slurp(fs::path("scenario_test_fb") / name));
        (void)bytes;
    }
    fs::remove_all("scenario_test_fa");
    fs::remove_all("scenario_test_fb");
}

TEST_CASE("deviation scenario reports the oracle comparison") {
    const std::string text =
        "[scenario]\n"
        "name = deviation\n"
        "[metric]\n"
        "name = schwarzschild\n"
        "M = 1\n"
        "[initial]\n"
        "x = 0 6 1.5707963267948966 0\n"
        "U = circular\n"
        "psi = 0 1 0 0\n"
        "oracle = true\n"
        "[integrator]\n"
        "step = 0.02\n"
        "s_end = 65.0\n";
    ScenarioConfig cfg = config_from(text);
    cfg.out_dir = "scenario_test_dev";
    const RunManifest man = run_scenario(cfg);
    REQUIRE(man.success);
    CHECK(man.results.at("oracle_rel_error") < 1e-3);
    const std::string csv = slurp(fs::path(cfg.out_dir) / "deviation.csv");
    CHECK(csv.find("oracle1") != std::string::npos);
    fs::remove_all(cfg.out_dir);
}

TEST_CASE("nelson scenario emits a histogram and the KS statistic") {
    const std::string text =
        "[scenario]\n"
        "name = nelson\n"
        "seed = 9\n"
        "[quantum]\n"
        "D = 0.5\n"
        "sigma = 1.0\n"
        "dt = 0.01\n"
        "burn_in = 10\n"
        "walkers = 1500\n"
        "bins = 41\n";
    ScenarioConfig cfg = config_from(text);
    cfg.out_dir = "scenario_test_nelson";
    const RunManifest man = run_scenario(cfg);
    REQUIRE(man.success);
    CHECK(man.results.at("ks_statistic") < man.results.at("ks_critical_1pct"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "histogram.csv"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "histogram.svg"));
    fs::remove_all(cfg.out_dir);
}

TEST_CASE("a failing scenario still writes the manifest with the error") {
    // schwarzschild with initial point at the excluded radius
    const std::string text =
        "[scenario]\n"
        "name = geodesic\n"
        "[metric]\n"
        "name = schwarzschild\n"
        "M = 1\n"
        "[initial]\n"
        "x = 0 2.0005 1.5707963267948966 0\n"
        "U = 1 0 0 0\n"
        "[integrator]\n"
        "s_end = 1\n";
    ScenarioConfig cfg = config_from(text);
    cfg.out_dir = "scenario_test_fail";
    const RunManifest man = run_scenario(cfg);
    CHECK(!man.success);
    CHECK(!man.error.empty());
    CHECK(fs::exists(fs::path(cfg.out_dir) / "manifest.json"));
    const std::string manifest = slurp(fs::path(cfg.out_dir) / "manifest.json");
    CHECK(manifest.find("\"success\": false") != std::string::npos);
    fs::remove_all(cfg.out_dir);
}

TEST_CASE("residual scenarios report both equation residuals side by side") {
    const std::string text =
        "[scenario]\n"
        "name = residual-schrodinger\n"
        "[quantum]\n"
        "D = 0.5\n"
        "k = 2 0 0\n"
        "omega = 2.0\n"
        "mode = grid\n"
        "grid_n = 32\n"
        "grid_h = 0.02\n";
    ScenarioConfig cfg = config_from(text);
    cfg.out_dir = "scenario_test_res";
    const RunManifest man = run_scenario(cfg);
    REQUIRE(man.success);
    CHECK(man.results.at("residual_linf") < 1e-8);       // on-dispersion plane wave
    CHECK(man.results.at("eq3_residual_linf") < 1e-8);   // Eq-3 side of the pair
    CHECK(man.results.count("grid_residual_linf") == 1);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "residual.wf"));
    fs::remove_all(cfg.out_dir);
}
