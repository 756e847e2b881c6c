#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fsp/errors.hpp"
#include "fsp/linalg.hpp"
#include "fsp/rng.hpp"

namespace fsp {

// A point of a coordinate chart, (x^0 .. x^3) = (t, x1, x2, x3) in geometric
// units c = G = 1. Signature convention throughout is (-,+,+,+).
struct ChartPoint {
    Vec4 coords{};

    double operator[](int i) const { return coords[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return coords[static_cast<std::size_t>(i)]; }
};

struct ConnectionCoefficients {
    Ten3 gamma{};  // gamma[a][m][n] = Gamma^a_{mn}, symmetric in (m, n)
};

struct CurvatureTensor {
    Ten4 riemann{};  // riemann[a][b][c][d] = R^a_{bcd}
    Mat4 ricci{};    // R_{bd} = R^a_{bad}
    double scalar = 0.0;
};

// Evaluator of metric components over one chart, plus what the numerics need
// to stay honest: a domain predicate, an optional exact connection, and a
// sampler of random interior points for property tests.
class MetricField {
  public:
    using Evaluator = std::function<Mat4(const ChartPoint&)>;
    using ConnectionEvaluator = std::function<Ten3(const ChartPoint&)>;
    using DomainPredicate = std::function<bool(const ChartPoint&)>;
    using InteriorSampler = std::function<ChartPoint(RngStream&)>;

    MetricField(std::string name, Evaluator metric);

    const std::string& name() const { return name_; }

    bool in_domain(const ChartPoint& x) const;
    Mat4 raw_components(const ChartPoint& x) const { return metric_(x); }

    bool has_exact_connection() const { return static_cast<bool>(connection_); }
    Ten3 exact_connection(const ChartPoint& x) const;

    ChartPoint random_interior_point(RngStream& rng) const;

    double det_floor() const { return det_floor_; }
    double fd_rel_step() const { return fd_rel_step_; }

    MetricField& set_domain(DomainPredicate p);
    MetricField& set_exact_connection(ConnectionEvaluator c);
    MetricField& set_interior_sampler(InteriorSampler s);
    MetricField& set_det_floor(double f);
    MetricField& set_fd_rel_step(double h);

  private:
    std::string name_;
    Evaluator metric_;
    ConnectionEvaluator connection_;
    DomainPredicate domain_;
    InteriorSampler sampler_;
    double det_floor_ = 1e-14;
    double fd_rel_step_ = 1e-5;
};

// Built-in space-times.
MetricField make_minkowski();
MetricField make_schwarzschild(double mass, double horizon_margin = 1e-3);
MetricField make_weak_field(double amplitude);

// Registry addressable from config files: "minkowski", "schwarzschild"
// (parameter M, optional margin), "weak-field" (parameter A).
MetricField make_metric(const std::string& name, const std::map<std::string, double>& params);

// g_{mn}(x). Throws DomainError outside the chart, SingularMetric when
// |det g| < det_floor, NonFiniteResult on bad components.
Mat4 metric_components(const MetricField& metric, const ChartPoint& x);

// g^{mn}(x) via pivoted elimination; the product with g is the identity to
// 1e-12 for the analytic metrics.
Mat4 inverse_metric(const MetricField& metric, const ChartPoint& x);

// Gamma^a_{mn} = (1/2) g^{ab} (d_m g_{bn} + d_n g_{bm} - d_b g_{mn}).
// Uses the registered exact evaluator when present, otherwise central
// differences with per-axis step h_mu = h_rel * max(1, |x_mu|).
ConnectionCoefficients christoffel(const MetricField& metric, const ChartPoint& x,
                                   double h_rel = 0.0);

// Always takes the finite-difference path (oracle cross-checks).
ConnectionCoefficients christoffel_fd(const MetricField& metric, const ChartPoint& x,
                                      double h_rel = 0.0);

// d_sigma Gamma^a_{mn}, central differences of christoffel().
// grad[sigma][a][m][n].
Ten4 connection_gradient(const MetricField& metric, const ChartPoint& x, double h_rel = 0.0);

// R^a_{bcd} = d_c Gamma^a_{bd} - d_d Gamma^a_{bc}
//           + Gamma^a_{cl} Gamma^l_{bd} - Gamma^a_{dl} Gamma^l_{bc},
// with Ricci R_{bd} = R^a_{bad} and scalar g^{bd} R_{bd}.
CurvatureTensor riemann(const MetricField& metric, const ChartPoint& x, double h_rel = 0.0);

// Curvature invariant R_{abcd} R^{abcd}; convention independent, used as the
// cross-check against closed forms (48 M^2 / r^6 for Schwarzschild).
double kretschmann(const MetricField& metric, const ChartPoint& x, double h_rel = 0.0);

// Discrete action of L = g_{ab} U^a DPsi^b/Ds along a sampled worldline,
// trapezoidal in s. psi_cov_rate holds DPsi/Ds samples. GridMismatch when the
// sample arrays disagree in length or s is not increasing.
double bazanski_action(const MetricField& metric, std::span<const double> s,
                       std::span<const ChartPoint> x, std::span<const Vec4> u,
                       std::span<const Vec4> psi_cov_rate);

}  // namespace fsp
