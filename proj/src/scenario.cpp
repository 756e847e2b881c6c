#include "fsp/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fsp/csv.hpp"
#include "fsp/deviation.hpp"
#include "fsp/fractal.hpp"
#include "fsp/motion.hpp"
#include "fsp/plot.hpp"
#include "fsp/quantum.hpp"
#include "fsp/version.hpp"

namespace fsp {

namespace fs = std::filesystem;

namespace {

// Everything one scenario writes goes through this, so the manifest can list
// every file with its size and be written last.
class Output {
  public:
    explicit Output(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

    void csv(const std::string& name, const CsvTable& table) {
        write_csv((dir_ / name).string(), table);
        record(name);
    }

    void text(const std::string& name, const std::string& content) {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw Error("cannot open output '" + name + "'");
        f << content;
        f.close();
        record(name);
    }

    void svg(const std::string& name, const PlotSpec& spec, const std::vector<CsvTable>& in) {
        text(name, emit_plot(spec, in));
    }

    void grid(const std::string& name, const WavefunctionGrid& g) {
        write_wavefunction_grid((dir_ / name).string(), g);
        record(name);
    }

    const std::vector<std::pair<std::string, std::uint64_t>>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

  private:
    void record(const std::string& name) {
        files_.emplace_back(name, static_cast<std::uint64_t>(fs::file_size(dir_ / name)));
    }

    fs::path dir_;
    std::vector<std::pair<std::string, std::uint64_t>> files_;
};

MetricField metric_from_config(const ScenarioConfig& cfg) {
    return make_metric(cfg.metric_name, cfg.metric_params);
}

ParticleState initial_state(const ScenarioConfig& cfg) {
    ParticleState st;
    st.s = 0.0;
    st.x.coords = cfg.x0;
    if (cfg.u_circular) {
        const double mass =
            cfg.metric_params.count("M") ? cfg.metric_params.at("M") : 1.0;
        st.u = circular_orbit_velocity(mass, cfg.x0[1]);
    } else {
        st.u = cfg.u0;
    }
    return st;
}

CsvTable trajectory_table(const Trajectory& traj) {
    CsvTable t;
    t.columns = {"s", "x0", "x1", "x2", "x3", "U0", "U1", "U2", "U3", "norm"};
    for (const auto& s : traj.samples)
        t.rows.push_back({s.s, s.x[0], s.x[1], s.x[2], s.x[3], s.u[0], s.u[1], s.u[2], s.u[3],
                          s.norm});
    return t;
}

CsvTable deviation_table(const PairedTrajectory& traj, const OracleDeviation* oracle) {
    CsvTable t;
    t.columns = {"s", "psi0", "psi1", "psi2", "psi3", "w0", "w1", "w2", "w3"};
    if (oracle)
        for (int c = 0; c < 4; ++c) t.columns.push_back("oracle" + std::to_string(c));
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        std::vector<double> row = {s.s,      s.psi[0], s.psi[1], s.psi[2], s.psi[3],
                                   s.w[0],   s.w[1],   s.w[2],   s.w[3]};
        if (oracle) {
            if (i < oracle->psi.size())
                for (int c = 0; c < 4; ++c) row.push_back(oracle->psi[i][c]);
            else
                for (int c = 0; c < 4; ++c) row.push_back(0.0);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable ensemble_table(const EnsembleResult& res, bool deviation) {
    CsvTable t;
    if (deviation)
        t.columns = {"s",   "mean_psi0", "mean_psi1", "mean_psi2", "mean_psi3",
                     "mean_w0", "mean_w1", "mean_w2", "mean_w3", "spread"};
    else
        t.columns = {"s",   "mean_x0", "mean_x1", "mean_x2", "mean_x3",
                     "mean_U0", "mean_U1", "mean_U2", "mean_U3", "spread"};
    for (std::size_t i = 0; i < res.s.size(); ++i) {
        std::vector<double> row = {res.s[i]};
        for (int c = 0; c < 8; ++c) row.push_back(res.mean[i][c]);
        row.push_back(res.spread[i]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string stats_text(const EnsembleResult& res, std::uint64_t seed) {
    std::string out = "key,value\n";
    out += "seed," + std::to_string(seed) + "\n";
    out += "n," + std::to_string(res.n) + "\n";
    for (const auto& p : res.convergence)
        out += "err_" + std::to_string(p.n) + "," + format_double(p.err) + "\n";
    if (res.has_fit) {
        out += "slope," + format_double(res.fit.slope) + "\n";
        out += "intercept," + format_double(res.fit.intercept) + "\n";
    }
    return out;
}

std::vector<std::size_t> fit_sizes_for(const ScenarioConfig& cfg) {
    if (!cfg.fit_sizes.empty()) return cfg.fit_sizes;
    std::vector<std::size_t> sizes;
    for (std::size_t s : {std::size_t{100}, std::size_t{1000}, std::size_t{10000}})
        if (s <= cfg.ensemble_n) sizes.push_back(s);
    if (sizes.empty() || sizes.back() != cfg.ensemble_n) sizes.push_back(cfg.ensemble_n);
    return sizes;
}

ParticleProperties particle_from_config(const ScenarioConfig& cfg, const MetricField& metric,
                                        const ParticleState& st) {
    ParticleProperties props;
    props.mass = cfg.mass;
    props.charge = cfg.charge;
    props.spin = SpinTensor::from_upper(cfg.spin[0], cfg.spin[1], cfg.spin[2], cfg.spin[3],
                                        cfg.spin[4], cfg.spin[5]);
    if (cfg.apply_ssc)
        props.spin = apply_spin_supplementary_condition(metric, st.x, st.u, props.spin);
    return props;
}

// ---- individual scenarios -------------------------------------------------

void run_trajectory_scenario(const ScenarioConfig& cfg, Output& out, RunManifest& man) {
    const MetricField metric = metric_from_config(cfg);
    const ParticleState st = initial_state(cfg);

    Rhs rhs;
    if (cfg.scenario == "geodesic") {
        rhs = [&metric](const ParticleState& s) { return geodesic_rhs(metric, s); };
    } else {
        const ParticleProperties props = particle_from_config(cfg, metric, st);
        const EMFieldTensor em = constant_em_field(cfg.e_field, cfg.b_field);
        if (cfg.scenario == "lorentz")
            rhs = [&metric, em, props](const ParticleState& s) {
                return lorentz_rhs(metric, em, props, s);
            };
        else if (cfg.scenario == "papapetrou")
            rhs = [&metric, props](const ParticleState& s) {
                return papapetrou_rhs(metric, props, s);
            };
        else
            rhs = [&metric, em, props](const ParticleState& s) {
                return dixon_rhs(metric, em, props, s);
            };
    }

    const Trajectory traj = integrate(rhs, metric, st, cfg.s_end, cfg.step);
    out.csv("trajectory.csv", trajectory_table(traj));

    man.results["norm_drift"] = norm_drift(traj);
    man.results["samples"] = static_cast<double>(traj.samples.size());
    man.results["trajectory_complete"] = traj.status == TrajectoryStatus::complete ? 1.0 : 0.0;
    if (traj.status != TrajectoryStatus::complete) man.notes.push_back(traj.error);

    PlotSpec spec;
    spec.kind = "line";
    spec.x = "s";
    spec.y = {"x1", "x2", "x3"};
    spec.title = cfg.scenario + " trajectory";
    out.svg("trajectory.svg", spec, {trajectory_table(traj)});
}

void run_deviation_scenario(const ScenarioConfig& cfg, Output& out, RunManifest& man) {
    const MetricField metric = metric_from_config(cfg);
    const ParticleState base = initial_state(cfg);
    const DeviationState dev{cfg.psi0, cfg.w0};

    const PairedTrajectory traj = integrate_deviation(metric, base, dev, cfg.s_end, cfg.step);
    OracleDeviation oracle;
    if (cfg.oracle) {
        oracle = two_geodesic_oracle(metric, base, cfg.psi0, cfg.w0, cfg.oracle_epsilon,
                                     cfg.s_end, cfg.step);
        man.results["oracle_rel_error"] = relative_sup_norm_error(traj, oracle);
    }
    const CsvTable table = deviation_table(traj, cfg.oracle ? &oracle : nullptr);
    out.csv("deviation.csv", table);

    man.results["samples"] = static_cast<double>(traj.samples.size());
    man.results["trajectory_complete"] = traj.status == TrajectoryStatus::complete ? 1.0 : 0.0;
    if (traj.status != TrajectoryStatus::complete) man.notes.push_back(traj.error);

    PlotSpec spec;
    spec.kind = "line";
    spec.x = "s";
    spec.y = {"psi0", "psi1", "psi2", "psi3"};
    spec.title = "geodesic deviation";
    out.svg("deviation.svg", spec, {table});
}

void run_fractal_scenario(const ScenarioConfig& cfg, Output& out, RunManifest& man) {
    const MetricField metric = metric_from_config(cfg);
    const ParticleState base = initial_state(cfg);
    const bool deviation = cfg.scenario == "fractal-deviation";

    FractalParams params = cfg.fractal;
    params.seed = cfg.seed;

    EnsembleOptions opts;
    opts.threads = cfg.threads;
    opts.store_stride = cfg.store_stride;
    opts.fit_sizes = fit_sizes_for(cfg);

    EnsembleResult res;
    if (deviation) {
        const DeviationState dev{cfg.psi0, cfg.w0};
        res = stochastic_deviation_ensemble(metric, params, base, dev, cfg.s_end, cfg.step,
                                            cfg.ensemble_n, opts);
    } else {
        res = stochastic_geodesic_ensemble(metric, params, base, cfg.s_end, cfg.step,
                                           cfg.ensemble_n, opts);
    }

    out.csv("ensemble_mean.csv", ensemble_table(res, deviation));
    out.text("stats.csv", stats_text(res, cfg.seed));

    CsvTable conv;
    conv.columns = {"n", "err"};
    for (const auto& p : res.convergence)
        conv.rows.push_back({static_cast<double>(p.n), p.err});
    out.csv("convergence.csv", conv);

    man.results["n"] = static_cast<double>(res.n);
    if (res.has_fit) {
        man.results["slope"] = res.fit.slope;
        man.results["intercept"] = res.fit.intercept;
    }

    PlotSpec spec;
    spec.kind = "loglog-fit";
    spec.x = "n";
    spec.y = {"err"};
    spec.title = "ensemble mean convergence";
    out.svg("convergence.svg", spec, {conv});
}

void run_nelson_scenario(const ScenarioConfig& cfg, Output& out, RunManifest& man) {
    const Wavefunction psi = gaussian_ground_state(cfg.sigma);
    WalkerEnsemble ens = init_walkers_uniform(cfg.walkers, 3.0 * cfg.sigma, cfg.quantum, cfg.seed);
    const long long steps = std::max(1ll, std::llround(cfg.burn_in / cfg.dt));
    for (long long k = 0; k < steps; ++k) walker_step(ens, psi, cfg.dt);

    const double sigma = cfg.sigma;
    auto density = [sigma](double x) {
        return std::exp(-x * x / (2.0 * sigma * sigma)) /
               (sigma * std::sqrt(2.0 * M_PI));
    };
    const Histogram hist =
        walker_histogram(ens, 0, cfg.bins, -4.0 * cfg.sigma, 4.0 * cfg.sigma, density);

    CsvTable table;
    table.columns = {"center", "count", "reference"};
    for (std::size_t i = 0; i < hist.centers.size(); ++i)
        table.rows.push_back({hist.centers[i], hist.counts[i], hist.reference[i]});
    out.csv("histogram.csv", table);

    std::vector<double> axis0;
    axis0.reserve(ens.positions.size());
    for (const auto& p : ens.positions) axis0.push_back(p[0]);
    const double ks = ks_statistic(axis0, [sigma](double x) { return normal_cdf(x, sigma); });

    man.results["ks_statistic"] = ks;
    man.results["ks_critical_1pct"] =
        1.63 / std::sqrt(static_cast<double>(ens.positions.size()));
    man.results["rejected"] = static_cast<double>(ens.rejected);
    man.results["walkers"] = static_cast<double>(ens.positions.size());
    man.results["burn_in_steps"] = static_cast<double>(steps);

    PlotSpec spec;
    spec.kind = "histogram-overlay";
    spec.x = "center";
    spec.y = {"count", "reference"};
    spec.title = "walker density vs |psi0|^2";
    out.svg("histogram.svg", spec, {table});
}

void run_residual_schrodinger_scenario(const ScenarioConfig& cfg, Output& out, RunManifest& man) {
    const Wavefunction psi = plane_wave(cfg.wave_k, cfg.omega);
    const double d = cfg.quantum.diffusion;
    const double k2 =
        cfg.wave_k[0] * cfg.wave_k[0] + cfg.wave_k[1] * cfg.wave_k[1] + cfg.wave_k[2] * cfg.wave_k[2];

    CsvTable table;
    table.columns = {"x", "re", "im", "abs", "eq3_abs"};
    double linf = 0.0, eq3_linf = 0.0;
    for (int i = 0; i < cfg.n_points; ++i) {
        const double x =
            cfg.x_lo + (cfg.x_hi - cfg.x_lo) * static_cast<double>(i) /
                           std::max(1, cfg.n_points - 1);
        const Vec3 p{x, 0.0, 0.0};
        const cplx r = schrodinger_residual(psi, cfg.quantum, p, 0.0);
        const CVec3 r3 = fractal_geodesic_residual(psi, cfg.quantum, p, 0.0);
        const double r3n =
            std::sqrt(std::norm(r3[0]) + std::norm(r3[1]) + std::norm(r3[2]));
        table.rows.push_back({x, r.real(), r.imag(), std::abs(r), r3n});
        linf = std::max(linf, std::abs(r));
        eq3_linf = std::max(eq3_linf, r3n);
    }
    out.csv("residual.csv", table);

    man.results["residual_linf"] = linf;
    man.results["expected_dispersion_gap"] = std::abs(d * cfg.omega - d * d * k2);
    man.results["eq3_residual_linf"] = eq3_linf;

    if (cfg.mode == "grid") {
        const std::array<int, 3> dims{cfg.grid_n, 1, 1};
        const std::array<double, 3> spacing{cfg.grid_h, cfg.grid_h, cfg.grid_h};
        const std::array<double, 3> origin{-0.5 * cfg.grid_h * (cfg.grid_n - 1), 0.0, 0.0};
        const double dt = 0.5 * cfg.grid_h;
        const WavefunctionGrid prev = sample_to_grid(psi, dims, spacing, origin, -dt);
        const WavefunctionGrid cur = sample_to_grid(psi, dims, spacing, origin, 0.0);
        const WavefunctionGrid next = sample_to_grid(psi, dims, spacing, origin, dt);
        const WavefunctionGrid res = schrodinger_residual_grid(prev, cur, next, cfg.quantum);
        out.grid("residual.wf", res);
        double grid_linf = 0.0;
        for (int i = 1; i + 1 < cfg.grid_n; ++i)
            grid_linf = std::max(grid_linf, std::abs(res.values[static_cast<std::size_t>(i)]));
        man.results["grid_residual_linf"] = grid_linf;
    }

    PlotSpec spec;
    spec.kind = "line";
    spec.x = "x";
    spec.y = {"abs", "eq3_abs"};
    spec.title = "wave-equation residuals";
    out.svg("residual.svg", spec, {table});
}

void run_residual_kg_scenario(const ScenarioConfig& cfg, Output& out, RunManifest& man) {
    const MetricField metric = metric_from_config(cfg);

    ChartScalarField psi;
    const Vec4 k4 = cfg.k4;
    if (cfg.field_kind == "plane-wave") {
        psi = [k4](const ChartPoint& p) {
            const double phase = k4[0] * p[0] + k4[1] * p[1] + k4[2] * p[2] + k4[3] * p[3];
            return std::exp(cplx(0.0, phase));
        };
    } else if (cfg.field_kind == "quadratic-phase") {
        const auto diag = cfg.quad_diag;
        const double mix = cfg.quad_mix;
        const Vec4 b = cfg.quad_b;
        psi = [diag, mix, b](const ChartPoint& p) {
            double q = 0.0;
            for (int i = 0; i < 4; ++i) q += 0.5 * diag[i] * p[i] * p[i] + b[i] * p[i];
            q += mix * p[0] * p[1];
            return std::exp(cplx(0.0, q));
        };
    } else {  // modulated-wave
        psi = [k4](const ChartPoint& p) {
            const double phase = k4[0] * p[0] + k4[1] * p[1] + k4[2] * p[2] + k4[3] * p[3];
            const double amp = 1.0 + 0.2 * std::sin(0.3 * p[1]);
            return amp * std::exp(cplx(0.0, phase));
        };
    }

    CsvTable table;
    table.columns = {"x1", "re0", "im0", "re1", "im1", "re2", "im2", "re3", "im3", "vec_norm"};
    double max_norm = 0.0;
    for (int i = 0; i < cfg.n_points; ++i) {
        ChartPoint p;
        p.coords = cfg.eval_point;
        p[1] += cfg.x_lo + (cfg.x_hi - cfg.x_lo) * static_cast<double>(i) /
                               std::max(1, cfg.n_points - 1);
        const CVec4 r = klein_gordon_residual(psi, metric, cfg.quantum, p, cfg.fd_h);
        double n2 = 0.0;
        std::vector<double> row = {p[1]};
        for (int c = 0; c < 4; ++c) {
            row.push_back(r[c].real());
            row.push_back(r[c].imag());
            n2 += std::norm(r[c]);
        }
        row.push_back(std::sqrt(n2));
        table.rows.push_back(std::move(row));
        max_norm = std::max(max_norm, std::sqrt(n2));
    }
    out.csv("kg_residual.csv", table);
    man.results["residual_max_norm"] = max_norm;

    PlotSpec spec;
    spec.kind = "line";
    spec.x = "x1";
    spec.y = {"vec_norm"};
    spec.title = "Klein-Gordon residual";
    out.svg("kg_residual.svg", spec, {table});
}

void run_scale_derivative_scenario(const ScenarioConfig& cfg, Output& out, RunManifest& man) {
    ScalarField f;
    const double c0 = cfg.f_const, ct = cfg.f_tcoeff;
    const Vec3 c = cfg.f_coeff;
    f.value = [c0, c, ct](const Vec3& x, double t) {
        return cplx(c0 + c[0] * x[0] + c[1] * x[1] + c[2] * x[2] + ct * t, 0.0);
    };
    f.gradient = [c](const Vec3&, double) {
        return CVec3{cplx(c[0], 0.0), cplx(c[1], 0.0), cplx(c[2], 0.0)};
    };
    f.time_derivative = [ct](const Vec3&, double) { return cplx(ct, 0.0); };
    f.laplacian = [](const Vec3&, double) { return cplx(0.0, 0.0); };

    const Vec3 vre = cfg.v_re, vim = cfg.v_im;
    ComplexVelocityField v;
    v.value = [vre, vim](const Vec3&, double) {
        return CVec3{cplx(vre[0], vim[0]), cplx(vre[1], vim[1]), cplx(vre[2], vim[2])};
    };

    CsvTable table;
    table.columns = {"x", "re", "im"};
    for (int i = 0; i < cfg.n_points; ++i) {
        const double x =
            cfg.x_lo + (cfg.x_hi - cfg.x_lo) * static_cast<double>(i) /
                           std::max(1, cfg.n_points - 1);
        const cplx r = scale_derivative(f, v, Vec3{x, 0.0, 0.0}, 0.0, cfg.extended,
                                        cfg.quantum.diffusion);
        table.rows.push_back({x, r.real(), r.imag()});
    }
    out.csv("scale_derivative.csv", table);
    man.results["points"] = static_cast<double>(table.rows.size());

    PlotSpec spec;
    spec.kind = "line";
    spec.x = "x";
    spec.y = {"re", "im"};
    spec.title = "scale derivative";
    out.svg("scale_derivative.svg", spec, {table});
}

}  // namespace

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["scenario"] = m.scenario;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["success"] = m.success;
    j["error"] = m.error;
    j["notes"] = m.notes;
    j["wall_time_s"] = m.wall_time_s;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [path, bytes] : m.outputs)
        j["outputs"].push_back({{"path", path}, {"bytes", bytes}});
    j["results"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : m.results) j["results"][key] = value;
    j["config_echo"] = m.config_echo;
    return j.dump(2) + "\n";
}

RunManifest run_scenario(const ScenarioConfig& cfg_in) {
    ScenarioConfig cfg = cfg_in;
    cfg.fractal.seed = cfg.seed;

    RunManifest man;
    man.scenario = cfg.scenario;
    man.version = kVersion;
    man.seed = cfg.seed;
    man.config_echo = cfg.raw_text;

    const auto t0 = std::chrono::steady_clock::now();
    Output out(cfg.out_dir);
    try {
        if (cfg.scenario == "geodesic" || cfg.scenario == "lorentz" ||
            cfg.scenario == "papapetrou" || cfg.scenario == "dixon")
            run_trajectory_scenario(cfg, out, man);
        else if (cfg.scenario == "deviation")
            run_deviation_scenario(cfg, out, man);
        else if (cfg.scenario == "fractal-ensemble" || cfg.scenario == "fractal-deviation")
            run_fractal_scenario(cfg, out, man);
        else if (cfg.scenario == "nelson")
            run_nelson_scenario(cfg, out, man);
        else if (cfg.scenario == "residual-schrodinger")
            run_residual_schrodinger_scenario(cfg, out, man);
        else if (cfg.scenario == "residual-kg")
            run_residual_kg_scenario(cfg, out, man);
        else if (cfg.scenario == "scale-derivative")
            run_scale_derivative_scenario(cfg, out, man);
        else
            throw Error("unknown scenario '" + cfg.scenario + "'");
        man.success = true;
    } catch (const std::exception& e) {
        man.success = false;
        man.error = e.what();
    }
    man.outputs = out.files();
    man.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ofstream mf(out.dir() / "manifest.json", std::ios::binary);
    mf << manifest_to_json(man);
    return man;
}

}  // namespace fsp
