#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fsp/config.hpp"
#include "fsp/deviation.hpp"
#include "fsp/fractal.hpp"
#include "fsp/geometry.hpp"
#include "fsp/motion.hpp"
#include "fsp/quantum.hpp"
#include "fsp/scenario.hpp"
#include "fsp/version.hpp"

namespace py = pybind11;
using namespace fsp;

namespace {

ChartPoint to_point(const Vec4& coords) {
    ChartPoint p;
    p.coords = coords;
    return p;
}

std::vector<std::vector<double>> mat_to_lists(const Mat4& m) {
    std::vector<std::vector<double>> out(4, std::vector<double>(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i][j] = m[i][j];
    return out;
}

py::dict trajectory_to_dict(const Trajectory& t) {
    py::list s, x, u, norm;
    for (const auto& smp : t.samples) {
        s.append(smp.s);
        x.append(smp.x);
        u.append(smp.u);
        norm.append(smp.norm);
    }
    py::dict d;
    d["s"] = s;
    d["x"] = x;
    d["u"] = u;
    d["norm"] = norm;
    d["complete"] = t.status == TrajectoryStatus::complete;
    d["error"] = t.error;
    return d;
}

py::dict paired_to_dict(const PairedTrajectory& t) {
    py::list s, x, u, psi, w;
    for (const auto& smp : t.samples) {
        s.append(smp.s);
        x.append(smp.x);
        u.append(smp.u);
        psi.append(smp.psi);
        w.append(smp.w);
    }
    py::dict d;
    d["s"] = s;
    d["x"] = x;
    d["u"] = u;
    d["psi"] = psi;
    d["w"] = w;
    d["complete"] = t.status == TrajectoryStatus::complete;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "geodesics, Bazanski deviation and stochastic path ensembles on "
              "curved and fluctuating backgrounds";
    m.attr("__version__") = kVersion;

    py::register_exception<DomainError>(m, "DomainError");
    py::register_exception<SingularMetric>(m, "SingularMetricError");
    py::register_exception<AmplitudeFloor>(m, "AmplitudeFloorError");

    py::class_<MetricField>(m, "Metric")
        .def(py::init([](const std::string& name, const std::map<std::string, double>& params) {
                 return make_metric(name, params);
             }),
             py::arg("name"), py::arg("params") = std::map<std::string, double>{})
        .def_property_readonly("name", &MetricField::name)
        .def("components",
             [](const MetricField& g, const Vec4& x) {
                 return mat_to_lists(metric_components(g, to_point(x)));
             })
        .def("inverse",
             [](const MetricField& g, const Vec4& x) {
                 return mat_to_lists(inverse_metric(g, to_point(x)));
             })
        .def("christoffel",
             [](const MetricField& g, const Vec4& x) {
                 const Ten3 c = christoffel(g, to_point(x)).gamma;
                 std::vector<std::vector<std::vector<double>>> out(
                     4, std::vector<std::vector<double>>(4, std::vector<double>(4)));
                 for (int a = 0; a < 4; ++a)
                     for (int i = 0; i < 4; ++i)
                         for (int j = 0; j < 4; ++j) out[a][i][j] = c[a][i][j];
                 return out;
             })
        .def("ricci_scalar",
             [](const MetricField& g, const Vec4& x) { return riemann(g, to_point(x)).scalar; })
        .def("kretschmann",
             [](const MetricField& g, const Vec4& x) { return kretschmann(g, to_point(x)); });

    m.def("circular_orbit_velocity", &circular_orbit_velocity, py::arg("mass"), py::arg("r"));

    m.def(
        "integrate_geodesic",
        [](const MetricField& metric, const Vec4& x0, const Vec4& u0, double s_end, double step) {
            ParticleState st{0.0, to_point(x0), u0};
            auto rhs = [&metric](const ParticleState& s) { return geodesic_rhs(metric, s); };
            return trajectory_to_dict(integrate(rhs, metric, st, s_end, step));
        },
        py::arg("metric"), py::arg("x0"), py::arg("u0"), py::arg("s_end"), py::arg("step"));

    m.def(
        "integrate_lorentz",
        [](const MetricField& metric, const Vec4& x0, const Vec4& u0, double s_end, double step,
           double mass, double charge, const Vec3& e_field, const Vec3& b_field) {
            ParticleState st{0.0, to_point(x0), u0};
            ParticleProperties props;
            props.mass = mass;
            props.charge = charge;
            const EMFieldTensor em = constant_em_field(e_field, b_field);
            auto rhs = [&metric, em, props](const ParticleState& s) {
                return lorentz_rhs(metric, em, props, s);
            };
            return trajectory_to_dict(integrate(rhs, metric, st, s_end, step));
        },
        py::arg("metric"), py::arg("x0"), py::arg("u0"), py::arg("s_end"), py::arg("step"),
        py::arg("mass") = 1.0, py::arg("charge") = 0.0, py::arg("e_field") = Vec3{},
        py::arg("b_field") = Vec3{});

    m.def(
        "integrate_deviation",
        [](const MetricField& metric, const Vec4& x0, const Vec4& u0, const Vec4& psi0,
           const Vec4& w0, double s_end, double step) {
            ParticleState st{0.0, to_point(x0), u0};
            return paired_to_dict(integrate_deviation(metric, st, DeviationState{psi0, w0},
                                                      s_end, step));
        },
        py::arg("metric"), py::arg("x0"), py::arg("u0"), py::arg("psi0"), py::arg("w0"),
        py::arg("s_end"), py::arg("step"));

    m.def(
        "two_geodesic_oracle",
        [](const MetricField& metric, const Vec4& x0, const Vec4& u0, const Vec4& psi0,
           const Vec4& w0, double eps, double s_end, double step) {
            ParticleState st{0.0, to_point(x0), u0};
            const OracleDeviation o = two_geodesic_oracle(metric, st, psi0, w0, eps, s_end, step);
            py::dict d;
            d["s"] = o.s;
            d["psi"] = o.psi;
            return d;
        },
        py::arg("metric"), py::arg("x0"), py::arg("u0"), py::arg("psi0"), py::arg("w0"),
        py::arg("eps"), py::arg("s_end"), py::arg("step"));

    m.def(
        "stochastic_geodesic_ensemble",
        [](const MetricField& metric, const Vec4& x0, const Vec4& u0, double s_end, double ds,
           std::size_t n_paths, double lambda_c, double amplitude, std::uint64_t seed,
           int threads, const std::vector<std::size_t>& fit_sizes) {
            FractalParams params;
            params.lambda_c = lambda_c;
            params.amplitude = amplitude;
            params.seed = seed;
            EnsembleOptions opts;
            opts.threads = threads;
            if (!fit_sizes.empty()) opts.fit_sizes = fit_sizes;
            ParticleState st{0.0, to_point(x0), u0};
            const EnsembleResult r =
                stochastic_geodesic_ensemble(metric, params, st, s_end, ds, n_paths, opts);
            py::dict d;
            d["n"] = r.n;
            d["s"] = r.s;
            d["mean"] = r.mean;
            d["spread"] = r.spread;
            py::list conv;
            for (const auto& p : r.convergence) conv.append(py::make_tuple(p.n, p.err));
            d["convergence"] = conv;
            if (r.has_fit) {
                d["slope"] = r.fit.slope;
                d["intercept"] = r.fit.intercept;
            }
            return d;
        },
        py::arg("metric"), py::arg("x0"), py::arg("u0"), py::arg("s_end"), py::arg("ds"),
        py::arg("n_paths"), py::arg("lambda_c") = 1.0, py::arg("amplitude") = 0.0,
        py::arg("seed") = 0, py::arg("threads") = 1,
        py::arg("fit_sizes") = std::vector<std::size_t>{});

    m.def(
        "schrodinger_residual_plane_wave",
        [](const Vec3& k, double omega, double diffusion, const Vec3& x, double t) {
            QuantumParams params;
            params.diffusion = diffusion;
            return schrodinger_residual(plane_wave(k, omega), params, x, t);
        },
        py::arg("k"), py::arg("omega"), py::arg("diffusion"), py::arg("x") = Vec3{},
        py::arg("t") = 0.0);

    m.def(
        "nelson_stationary_ks",
        [](std::size_t walkers, double sigma, double diffusion, double dt, double burn_in,
           std::uint64_t seed) {
            QuantumParams params;
            params.diffusion = diffusion;
            const Wavefunction psi = gaussian_ground_state(sigma);
            WalkerEnsemble ens = init_walkers_uniform(walkers, 3.0 * sigma, params, seed);
            const long long steps = std::max(1ll, std::llround(burn_in / dt));
            for (long long i = 0; i < steps; ++i) walker_step(ens, psi, dt);
            std::vector<double> axis0;
            for (const auto& p : ens.positions) axis0.push_back(p[0]);
            return ks_statistic(axis0, [sigma](double v) { return normal_cdf(v, sigma); });
        },
        py::arg("walkers"), py::arg("sigma") = 1.0, py::arg("diffusion") = 0.5,
        py::arg("dt") = 0.01, py::arg("burn_in") = 10.0, py::arg("seed") = 0);

    m.def(
        "run_scenario",
        [](const std::string& config_path, const std::string& out_dir, py::object seed) {
            ScenarioConfig cfg = load_config_file(config_path);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (!seed.is_none()) cfg.seed = seed.cast<std::uint64_t>();
            const RunManifest man = run_scenario(cfg);
            py::dict d;
            d["scenario"] = man.scenario;
            d["success"] = man.success;
            d["error"] = man.error;
            d["seed"] = man.seed;
            py::list outputs;
            for (const auto& [path, bytes] : man.outputs)
                outputs.append(py::make_tuple(path, bytes));
            d["outputs"] = outputs;
            d["results"] = man.results;
            return d;
        },
        py::arg("config_path"), py::arg("out_dir") = std::string(),
        py::arg("seed") = py::none());

    m.def("validate_config", [](const std::string& path) {
        const ParseResult r = parse_config_file(path);
        std::vector<std::string> errors;
        for (const auto& e : r.errors) errors.push_back(e.str());
        return errors;
    });

    m.def("scenario_names", [] { return scenario_names(); });
}
