#pragma once

#include "fsp/motion.hpp"

namespace fsp {

// Deviation vector Psi^a and its coordinate rate W^a = dPsi^a/ds. The state
// keeps the coordinate rate so the stepper needs no connection; conversion to
// the covariant rate DPsi/Ds is below.
struct DeviationState {
    Vec4 psi{};
    Vec4 w{};
};

struct DeviationDeriv {
    Vec4 dpsi{};
    Vec4 dw{};
};

// DPsi^a/Ds = W^a + Gamma^a_{mn} U^m Psi^n
Vec4 covariant_rate(const MetricField& metric, const ParticleState& base,
                    const DeviationState& dev);

// Inverse conversion: W^a = P^a - Gamma^a_{mn} U^m Psi^n
Vec4 coordinate_rate(const MetricField& metric, const ParticleState& base, const Vec4& psi,
                     const Vec4& cov_rate);

// First-order coordinate form of D^2 Psi^a / Ds^2 = R^a_{bcd} U^b U^c Psi^d
// along a base geodesic, expanded with Gamma and dGamma.
DeviationDeriv deviation_rhs(const MetricField& metric, const ParticleState& base,
                             const DeviationState& dev);

struct PairedSample {
    double s = 0.0;
    Vec4 x{};
    Vec4 u{};
    double norm = 0.0;
    Vec4 psi{};
    Vec4 w{};
};

struct PairedTrajectory {
    std::vector<PairedSample> samples;
    TrajectoryStatus status = TrajectoryStatus::complete;
    std::string error;

    const PairedSample& back() const { return samples.back(); }
};

// One joint RK4 step of (base, deviation). Shared by the deterministic and
// stochastic deviation integrators.
struct PairState {
    ParticleState base;
    DeviationState dev;
};

PairState deviation_rk4_step(const MetricField& metric, const PairState& state, double h);

PairedSample paired_sample(const MetricField& metric, const PairState& state);

// Base geodesic and deviation evolved jointly with one RK4 stepper and one
// step sequence (same step policy as integrate()).
PairedTrajectory integrate_deviation(const MetricField& metric, const ParticleState& base0,
                                     const DeviationState& dev0, double s_end, double step);

// Independent finite-difference oracle: integrates geodesics from x0 and from
// x0 + eps*Psi0 with velocities U0 and U0 + eps*W0, and returns
// (x2(s) - x1(s)) / eps on the shared s grid. W0 is the coordinate rate; pass
// coordinate_rate(...) to offset by a covariant rate instead.
struct OracleDeviation {
    std::vector<double> s;
    std::vector<Vec4> psi;
    TrajectoryStatus status = TrajectoryStatus::complete;
};

OracleDeviation two_geodesic_oracle(const MetricField& metric, const ParticleState& base0,
                                    const Vec4& psi0, const Vec4& w0, double eps, double s_end,
                                    double step);

// sup_s |psi_a(s) - psi_b(s)| / sup_s |psi_b(s)| over the common grid.
double relative_sup_norm_error(const PairedTrajectory& integrated, const OracleDeviation& oracle);

}  // namespace fsp
