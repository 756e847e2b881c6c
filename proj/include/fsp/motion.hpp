#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fsp/geometry.hpp"

namespace fsp {

// Worldline sample: proper time, chart position, velocity U^m = dx^m/ds.
struct ParticleState {
    double s = 0.0;
    ChartPoint x{};
    Vec4 u{};
};

// Antisymmetric spin tensor S^{cd}. Construction from the six upper-triangle
// components keeps the antisymmetry exact.
struct SpinTensor {
    Mat4 s{};

    static SpinTensor from_upper(double s01, double s02, double s03, double s12, double s13,
                                 double s23);
    bool is_zero() const;
};

struct ParticleProperties {
    double mass = 1.0;
    double charge = 0.0;
    SpinTensor spin{};
};

// Enforce the supplementary condition S^{cd} U_d = 0 by projecting S onto the
// subspace orthogonal to U. Off by default; the force laws accept any S.
SpinTensor apply_spin_supplementary_condition(const MetricField& metric, const ChartPoint& x,
                                              const Vec4& u, const SpinTensor& spin);

// Electromagnetic field as the covariant tensor F_{mn}(x), antisymmetric at
// every evaluated point.
struct EMFieldTensor {
    std::function<Mat4(const ChartPoint&)> f_lower;
};

// Constant E/B field in chart components: F_{i0} = E_i, F_{12} = B_z,
// F_{23} = B_x, F_{31} = B_y.
EMFieldTensor constant_em_field(const Vec3& e_field, const Vec3& b_field);

struct StateDeriv {
    Vec4 dx{};
    Vec4 du{};
};

// dU^a/ds = -Gamma^a_{mn} U^m U^n
StateDeriv geodesic_rhs(const MetricField& metric, const ParticleState& state);

// The force accelerations alone. The *_rhs functions add these to the
// geodesic right-hand side, and dixon adds both in this order, so additivity
// of the force terms holds bitwise.
Vec4 lorentz_force(const MetricField& metric, const EMFieldTensor& field,
                   const ParticleProperties& props, const ParticleState& state);
Vec4 papapetrou_force(const MetricField& metric, const ParticleProperties& props,
                      const ParticleState& state);

// geodesic + (e/m) F^a_n U^n
StateDeriv lorentz_rhs(const MetricField& metric, const EMFieldTensor& field,
                       const ParticleProperties& props, const ParticleState& state);

// geodesic + (1/2m) R^a_{ncd} S^{cd} U^n
StateDeriv papapetrou_rhs(const MetricField& metric, const ParticleProperties& props,
                          const ParticleState& state);

// geodesic + both force terms
StateDeriv dixon_rhs(const MetricField& metric, const EMFieldTensor& field,
                     const ParticleProperties& props, const ParticleState& state);

using Rhs = std::function<StateDeriv(const ParticleState&)>;

struct TrajectorySample {
    double s = 0.0;
    Vec4 x{};
    Vec4 u{};
    double norm = 0.0;  // g_{mn} U^m U^n, recorded (never renormalized)
};

enum class TrajectoryStatus { complete, domain_error };

struct Trajectory {
    std::vector<TrajectorySample> samples;
    TrajectoryStatus status = TrajectoryStatus::complete;
    std::string error;

    const TrajectorySample& back() const { return samples.back(); }
};

// One classical RK4 step of (x, U).
ParticleState rk4_step(const Rhs& rhs, const ParticleState& state, double h);

// Sample with the conserved-norm diagnostic attached. integrate() and the
// stochastic steppers both record through this, so zero-amplitude reductions
// stay bitwise identical.
TrajectorySample trajectory_sample(const MetricField& metric, const ParticleState& state);

// Fixed-step RK4 from state.s to s_end (either direction). The step count is
// n = round(|s_end - s0| / step) and the realized step (s_end - s0)/n, so
// halving `step` exactly doubles n. Samples include both endpoints.
// A DomainError mid-run returns the partial trajectory with the error mark;
// a non-finite state aborts by throwing NonFiniteResult.
Trajectory integrate(const Rhs& rhs, const MetricField& metric, const ParticleState& initial,
                     double s_end, double step);

// Global step-halving control: rerun with step/2 until the endpoint moves by
// less than tol between consecutive refinements (at most max_halvings).
Trajectory integrate_adaptive(const Rhs& rhs, const MetricField& metric,
                              const ParticleState& initial, double s_end, double step, double tol,
                              int max_halvings = 8);

// |max norm deviation from the initial g U U| over the trajectory.
double norm_drift(const Trajectory& traj);

// Velocity of a circular equatorial Schwarzschild orbit at radius r (M from
// the metric parameter), with Omega^2 = M / r^3 and U normalized timelike.
Vec4 circular_orbit_velocity(double mass, double r);

}  // namespace fsp
