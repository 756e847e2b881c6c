#include "fsp/motion.hpp"

#include <cmath>
#include <cstdlib>

namespace fsp {

SpinTensor SpinTensor::from_upper(double s01, double s02, double s03, double s12, double s13,
                                  double s23) {
    SpinTensor t;
    t.s[0][1] = s01;
    t.s[0][2] = s02;
    t.s[0][3] = s03;
    t.s[1][2] = s12;
    t.s[1][3] = s13;
    t.s[2][3] = s23;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j) t.s[i][j] = -t.s[j][i];
    return t;
}

bool SpinTensor::is_zero() const {
    return max_abs(s) == 0.0;
}

SpinTensor apply_spin_supplementary_condition(const MetricField& metric, const ChartPoint& x,
                                              const Vec4& u, const SpinTensor& spin) {
    const Mat4 g = metric_components(metric, x);
    const Vec4 u_low = matvec(g, u);
    const double uu = dot(g, u, u);
    if (uu == 0.0) throw Error("spin supplementary condition needs non-null U");

    // Projector P^a_b = delta^a_b - U^a U_b / (U.U)
    Mat4 proj{};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) proj[a][b] = (a == b ? 1.0 : 0.0) - u[a] * u_low[b] / uu;

    SpinTensor out;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            double v = 0.0;
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) v += proj[a][c] * proj[b][d] * spin.s[c][d];
            out.s[a][b] = v;
            out.s[b][a] = -v;
        }
    return out;
}

EMFieldTensor constant_em_field(const Vec3& e_field, const Vec3& b_field) {
    // F_{i0} = E_i, F_{12} = B_z, F_{23} = B_x, F_{31} = B_y. Fill the lower
    // triangle, then mirror.
    Mat4 f{};
    f[1][0] = e_field[0];
    f[2][0] = e_field[1];
    f[3][0] = e_field[2];
    f[2][1] = -b_field[2];
    f[3][2] = -b_field[0];
    f[3][1] = b_field[1];
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) f[i][j] = -f[j][i];
    return EMFieldTensor{[f](const ChartPoint&) { return f; }};
}

StateDeriv geodesic_rhs(const MetricField& metric, const ParticleState& state) {
    const Ten3 gamma = christoffel(metric, state.x).gamma;
    StateDeriv d;
    d.dx = state.u;
    for (int a = 0; a < 4; ++a) {
        double acc = 0.0;
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) acc += gamma[a][m][n] * state.u[m] * state.u[n];
        d.du[a] = -acc;
    }
    return d;
}

Vec4 lorentz_force(const MetricField& metric, const EMFieldTensor& field,
                   const ParticleProperties& props, const ParticleState& state) {
    const Mat4 f = field.f_lower(state.x);
    const double scale = std::max(1.0, max_abs(f));
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j)
            if (std::abs(f[i][j] + f[j][i]) > 1e-12 * scale)
                throw Error("EM field tensor not antisymmetric at evaluated point");

    const Mat4 ginv = inverse_metric(metric, state.x);
    const double q = props.charge / props.mass;
    Vec4 force{};
    for (int a = 0; a < 4; ++a) {
        double acc = 0.0;
        for (int b = 0; b < 4; ++b)
            for (int n = 0; n < 4; ++n) acc += ginv[a][b] * f[b][n] * state.u[n];
        force[a] = q * acc;
    }
    if (!all_finite(force)) throw NonFiniteResult("lorentz_force: non-finite");
    return force;
}

Vec4 papapetrou_force(const MetricField& metric, const ParticleProperties& props,
                      const ParticleState& state) {
    const Ten4 r = riemann(metric, state.x).riemann;
    const double c = 0.5 / props.mass;
    Vec4 force{};
    for (int a = 0; a < 4; ++a) {
        double acc = 0.0;
        for (int n = 0; n < 4; ++n)
            for (int sg = 0; sg < 4; ++sg)
                for (int rh = 0; rh < 4; ++rh)
                    acc += r[a][n][sg][rh] * props.spin.s[sg][rh] * state.u[n];
        force[a] = c * acc;
    }
    if (!all_finite(force)) throw NonFiniteResult("papapetrou_force: non-finite");
    return force;
}

StateDeriv lorentz_rhs(const MetricField& metric, const EMFieldTensor& field,
                       const ParticleProperties& props, const ParticleState& state) {
    StateDeriv d = geodesic_rhs(metric, state);
    if (props.charge == 0.0) return d;
    const Vec4 force = lorentz_force(metric, field, props, state);
    for (int a = 0; a < 4; ++a) d.du[a] += force[a];
    return d;
}

StateDeriv papapetrou_rhs(const MetricField& metric, const ParticleProperties& props,
                          const ParticleState& state) {
    StateDeriv d = geodesic_rhs(metric, state);
    if (props.spin.is_zero()) return d;
    const Vec4 force = papapetrou_force(metric, props, state);
    for (int a = 0; a < 4; ++a) d.du[a] += force[a];
    return d;
}

StateDeriv dixon_rhs(const MetricField& metric, const EMFieldTensor& field,
                     const ParticleProperties& props, const ParticleState& state) {
    StateDeriv d = geodesic_rhs(metric, state);
    if (props.charge != 0.0) {
        const Vec4 lf = lorentz_force(metric, field, props, state);
        for (int a = 0; a < 4; ++a) d.du[a] += lf[a];
    }
    if (!props.spin.is_zero()) {
        const Vec4 pf = papapetrou_force(metric, props, state);
        for (int a = 0; a < 4; ++a) d.du[a] += pf[a];
    }
    return d;
}

ParticleState rk4_step(const Rhs& rhs, const ParticleState& state, double h) {
    const StateDeriv k1 = rhs(state);

    ParticleState s2 = state;
    s2.s = state.s + 0.5 * h;
    for (int i = 0; i < 4; ++i) {
        s2.x[i] = state.x[i] + 0.5 * h * k1.dx[i];
        s2.u[i] = state.u[i] + 0.5 * h * k1.du[i];
    }
    const StateDeriv k2 = rhs(s2);

    ParticleState s3 = state;
    s3.s = state.s + 0.5 * h;
    for (int i = 0; i < 4; ++i) {
        s3.x[i] = state.x[i] + 0.5 * h * k2.dx[i];
        s3.u[i] = state.u[i] + 0.5 * h * k2.du[i];
    }
    const StateDeriv k3 = rhs(s3);

    ParticleState s4 = state;
    s4.s = state.s + h;
    for (int i = 0; i < 4; ++i) {
        s4.x[i] = state.x[i] + h * k3.dx[i];
        s4.u[i] = state.u[i] + h * k3.du[i];
    }
    const StateDeriv k4 = rhs(s4);

    ParticleState out = state;
    out.s = state.s + h;
    const double w = h / 6.0;
    for (int i = 0; i < 4; ++i) {
        out.x[i] = state.x[i] + w * (k1.dx[i] + 2.0 * (k2.dx[i] + k3.dx[i]) + k4.dx[i]);
        out.u[i] = state.u[i] + w * (k1.du[i] + 2.0 * (k2.du[i] + k3.du[i]) + k4.du[i]);
    }
    return out;
}

TrajectorySample trajectory_sample(const MetricField& metric, const ParticleState& st) {
    const Mat4 g = metric_components(metric, st.x);
    return TrajectorySample{st.s, st.x.coords, st.u, dot(g, st.u, st.u)};
}

Trajectory integrate(const Rhs& rhs, const MetricField& metric, const ParticleState& initial,
                     double s_end, double step) {
    if (step <= 0.0) throw Error("integrate: step must be positive");
    const double span = s_end - initial.s;
    if (span == 0.0) throw Error("integrate: empty integration interval");
    const long long n = std::max(1ll, std::llround(std::abs(span) / step));
    const double h = span / static_cast<double>(n);

    Trajectory traj;
    traj.samples.reserve(static_cast<std::size_t>(n) + 1);
    ParticleState state = initial;
    traj.samples.push_back(trajectory_sample(metric, state));

    for (long long k = 0; k < n; ++k) {
        ParticleState next;
        try {
            next = rk4_step(rhs, state, h);
            if (!all_finite(next.x.coords) || !all_finite(next.u))
                throw NonFiniteResult("integrate: non-finite state");
            traj.samples.push_back(trajectory_sample(metric, next));
        } catch (const DomainError& e) {
            traj.status = TrajectoryStatus::domain_error;
            traj.error = e.what();
            return traj;
        }
        state = next;
    }
    return traj;
}

Trajectory integrate_adaptive(const Rhs& rhs, const MetricField& metric,
                              const ParticleState& initial, double s_end, double step, double tol,
                              int max_halvings) {
    Trajectory best = integrate(rhs, metric, initial, s_end, step);
    for (int i = 0; i < max_halvings; ++i) {
        if (best.status != TrajectoryStatus::complete) return best;
        step *= 0.5;
        Trajectory finer = integrate(rhs, metric, initial, s_end, step);
        double diff = 0.0;
        for (int c = 0; c < 4; ++c) {
            diff = std::max(diff, std::abs(finer.back().x[c] - best.back().x[c]));
            diff = std::max(diff, std::abs(finer.back().u[c] - best.back().u[c]));
        }
        best = std::move(finer);
        if (diff < tol) return best;
    }
    return best;
}

double norm_drift(const Trajectory& traj) {
    if (traj.samples.empty()) return 0.0;
    const double n0 = traj.samples.front().norm;
    double drift = 0.0;
    for (const auto& s : traj.samples) drift = std::max(drift, std::abs(s.norm - n0));
    return drift;
}

Vec4 circular_orbit_velocity(double mass, double r) {
    const double omega = std::sqrt(mass / (r * r * r));
    const double ut = 1.0 / std::sqrt(1.0 - 3.0 * mass / r);
    return Vec4{ut, 0.0, 0.0, omega * ut};
}

}  // namespace fsp
