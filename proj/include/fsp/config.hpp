#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fsp/fractal.hpp"
#include "fsp/linalg.hpp"
#include "fsp/quantum.hpp"

namespace fsp {

// Scenario names understood by the runner.
const std::vector<std::string>& scenario_names();

struct ConfigError {
    enum class Kind { parse, validation };
    Kind kind = Kind::parse;
    int line = 0;        // 0 when not tied to a line
    int other_line = 0;  // second line for duplicate keys
    std::string field;
    std::string message;

    std::string str() const;
};

// Fully resolved scenario configuration with defaults applied.
struct ScenarioConfig {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    // metric
    std::string metric_name = "minkowski";
    std::map<std::string, double> metric_params;

    // initial conditions
    Vec4 x0{};
    Vec4 u0{1.0, 0.0, 0.0, 0.0};
    bool u_circular = false;   // U = circular (Schwarzschild equatorial)
    Vec4 psi0{};
    Vec4 w0{};
    bool oracle = false;       // emit two-geodesic oracle columns
    double oracle_epsilon = 1e-6;

    // integrator
    double step = 0.01;
    double s_end = 1.0;

    // particle / fields
    double mass = 1.0;
    double charge = 0.0;
    std::array<double, 6> spin{};
    bool apply_ssc = false;
    Vec3 e_field{};
    Vec3 b_field{};

    // fractal
    FractalParams fractal;
    std::size_t ensemble_n = 100;
    std::vector<std::size_t> fit_sizes;
    int threads = 1;
    std::size_t store_stride = 1;

    // quantum
    QuantumParams quantum;
    Vec3 wave_k{1.0, 0.0, 0.0};
    double omega = 0.5;
    double sigma = 1.0;
    double dt = 0.01;
    double burn_in = 10.0;
    std::size_t walkers = 1000;
    int bins = 61;
    std::string mode = "analytic";  // analytic | grid
    int grid_n = 64;
    double grid_h = 0.05;
    std::string field_kind = "plane-wave";  // plane-wave | quadratic-phase | modulated-wave
    Vec4 k4{};                              // chart phase covector
    std::array<double, 4> quad_diag{};      // quadratic phase M diagonal
    double quad_mix = 0.0;                  // off-diagonal M_{01}=M_{10}
    Vec4 quad_b{};                          // linear phase part
    double fd_h = 1e-3;
    Vec4 eval_point{};
    // scale-derivative scenario
    double f_const = 0.0;
    Vec3 f_coeff{};
    double f_tcoeff = 0.0;
    Vec3 v_re{};
    Vec3 v_im{};
    bool extended = false;
    int n_points = 21;
    double x_lo = -1.0;
    double x_hi = 1.0;

    std::string raw_text;  // config echo for the manifest
};

struct ParseResult {
    std::optional<ScenarioConfig> config;
    std::vector<ConfigError> errors;

    bool ok() const { return errors.empty(); }
};

// Line-oriented "key = value" format with [section] headers and '#' comments.
// Returns the fully validated config, or every error found (parse errors with
// line numbers, validation errors naming the field).
ParseResult parse_config(const std::string& text);

ParseResult parse_config_file(const std::string& path);

// Convenience: throws Error with the joined message list on failure.
ScenarioConfig load_config_file(const std::string& path);

}  // namespace fsp
