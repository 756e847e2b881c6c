#include "fsp/deviation.hpp"

#include <cmath>

namespace fsp {

Vec4 covariant_rate(const MetricField& metric, const ParticleState& base,
                    const DeviationState& dev) {
    const Ten3 gamma = christoffel(metric, base.x).gamma;
    Vec4 p = dev.w;
    for (int a = 0; a < 4; ++a)
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) p[a] += gamma[a][m][n] * base.u[m] * dev.psi[n];
    return p;
}

Vec4 coordinate_rate(const MetricField& metric, const ParticleState& base, const Vec4& psi,
                     const Vec4& cov_rate) {
    const Ten3 gamma = christoffel(metric, base.x).gamma;
    Vec4 w = cov_rate;
    for (int a = 0; a < 4; ++a)
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) w[a] -= gamma[a][m][n] * base.u[m] * psi[n];
    return w;
}

DeviationDeriv deviation_rhs(const MetricField& metric, const ParticleState& base,
                             const DeviationState& dev) {
    const Ten3 gamma = christoffel(metric, base.x).gamma;
    const Ten4 dgamma = connection_gradient(metric, base.x);

    // Curvature from the same Gamma/dGamma evaluations.
    Ten4 riem{};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    double quad = 0.0;
                    for (int l = 0; l < 4; ++l)
                        quad += gamma[a][c][l] * gamma[l][b][d] - gamma[a][d][l] * gamma[l][b][c];
                    riem[a][b][c][d] = dgamma[c][a][b][d] - dgamma[d][a][b][c] + quad;
                }

    // Base geodesic acceleration A^m = -Gamma^m_{rs} U^r U^s.
    Vec4 acc{};
    for (int m = 0; m < 4; ++m) {
        double v = 0.0;
        for (int r = 0; r < 4; ++r)
            for (int s = 0; s < 4; ++s) v += gamma[m][r][s] * base.u[r] * base.u[s];
        acc[m] = -v;
    }

    // Covariant rate P^a = W^a + Gamma^a_{mn} U^m Psi^n.
    Vec4 p = dev.w;
    for (int a = 0; a < 4; ++a)
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) p[a] += gamma[a][m][n] * base.u[m] * dev.psi[n];

    // dW^a/ds = R^a_{bcd} U^b U^c Psi^d
    //           - dGamma^a_{mn}/dx^s U^s U^m Psi^n
    //           - Gamma^a_{mn} A^m Psi^n
    //           - Gamma^a_{mn} U^m W^n
    //           - Gamma^a_{mn} U^m P^n
    DeviationDeriv out;
    out.dpsi = dev.w;
    for (int a = 0; a < 4; ++a) {
        double v = 0.0;
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d)
                    v += riem[a][b][c][d] * base.u[b] * base.u[c] * dev.psi[d];
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) {
                double dg_un = 0.0;
                for (int s = 0; s < 4; ++s) dg_un += dgamma[s][a][m][n] * base.u[s];
                v -= dg_un * base.u[m] * dev.psi[n];
                v -= gamma[a][m][n] * acc[m] * dev.psi[n];
                v -= gamma[a][m][n] * base.u[m] * dev.w[n];
                v -= gamma[a][m][n] * base.u[m] * p[n];
            }
        out.dw[a] = v;
    }
    if (!all_finite(out.dw)) throw NonFiniteResult("deviation_rhs: non-finite");
    return out;
}

namespace {

struct PairDeriv {
    StateDeriv base;
    DeviationDeriv dev;
};

PairDeriv pair_rhs(const MetricField& metric, const PairState& st) {
    PairDeriv d;
    d.base = geodesic_rhs(metric, st.base);
    d.dev = deviation_rhs(metric, st.base, st.dev);
    return d;
}

PairState pair_advance(const PairState& st, const PairDeriv& d, double h) {
    PairState out = st;
    out.base.s = st.base.s + h;
    for (int i = 0; i < 4; ++i) {
        out.base.x[i] = st.base.x[i] + h * d.base.dx[i];
        out.base.u[i] = st.base.u[i] + h * d.base.du[i];
        out.dev.psi[i] = st.dev.psi[i] + h * d.dev.dpsi[i];
        out.dev.w[i] = st.dev.w[i] + h * d.dev.dw[i];
    }
    return out;
}

}  // namespace

PairState deviation_rk4_step(const MetricField& metric, const PairState& st, double h) {
    const PairDeriv k1 = pair_rhs(metric, st);
    const PairDeriv k2 = pair_rhs(metric, pair_advance(st, k1, 0.5 * h));
    const PairDeriv k3 = pair_rhs(metric, pair_advance(st, k2, 0.5 * h));
    const PairDeriv k4 = pair_rhs(metric, pair_advance(st, k3, h));

    PairState out = st;
    out.base.s = st.base.s + h;
    const double w = h / 6.0;
    for (int i = 0; i < 4; ++i) {
        out.base.x[i] =
            st.base.x[i] + w * (k1.base.dx[i] + 2.0 * (k2.base.dx[i] + k3.base.dx[i]) + k4.base.dx[i]);
        out.base.u[i] =
            st.base.u[i] + w * (k1.base.du[i] + 2.0 * (k2.base.du[i] + k3.base.du[i]) + k4.base.du[i]);
        out.dev.psi[i] =
            st.dev.psi[i] + w * (k1.dev.dpsi[i] + 2.0 * (k2.dev.dpsi[i] + k3.dev.dpsi[i]) + k4.dev.dpsi[i]);
        out.dev.w[i] =
            st.dev.w[i] + w * (k1.dev.dw[i] + 2.0 * (k2.dev.dw[i] + k3.dev.dw[i]) + k4.dev.dw[i]);
    }
    return out;
}

PairedSample paired_sample(const MetricField& metric, const PairState& st) {
    const Mat4 g = metric_components(metric, st.base.x);
    return PairedSample{st.base.s, st.base.x.coords, st.base.u, dot(g, st.base.u, st.base.u),
                        st.dev.psi, st.dev.w};
}

PairedTrajectory integrate_deviation(const MetricField& metric, const ParticleState& base0,
                                     const DeviationState& dev0, double s_end, double step) {
    if (step <= 0.0) throw Error("integrate_deviation: step must be positive");
    const double span = s_end - base0.s;
    if (span == 0.0) throw Error("integrate_deviation: empty interval");
    const long long n = std::max(1ll, std::llround(std::abs(span) / step));
    const double h = span / static_cast<double>(n);

    PairedTrajectory traj;
    traj.samples.reserve(static_cast<std::size_t>(n) + 1);
    PairState st{base0, dev0};
    traj.samples.push_back(paired_sample(metric, st));

    for (long long k = 0; k < n; ++k) {
        try {
            PairState next = deviation_rk4_step(metric, st, h);
            if (!all_finite(next.base.x.coords) || !all_finite(next.dev.psi))
                throw NonFiniteResult("integrate_deviation: non-finite state");
            traj.samples.push_back(paired_sample(metric, next));
            st = next;
        } catch (const DomainError& e) {
            traj.status = TrajectoryStatus::domain_error;
            traj.error = e.what();
            return traj;
        }
    }
    return traj;
}

OracleDeviation two_geodesic_oracle(const MetricField& metric, const ParticleState& base0,
                                    const Vec4& psi0, const Vec4& w0, double eps, double s_end,
                                    double step) {
    if (eps <= 0.0) throw Error("two_geodesic_oracle: eps must be positive");

    ParticleState offset = base0;
    for (int i = 0; i < 4; ++i) {
        offset.x[i] = base0.x[i] + eps * psi0[i];
        offset.u[i] = base0.u[i] + eps * w0[i];
    }
    if (!metric.in_domain(offset.x))
        throw DomainError("two_geodesic_oracle: offset initial point outside domain");

    auto rhs = [&metric](const ParticleState& st) { return geodesic_rhs(metric, st); };
    const Trajectory t1 = integrate(rhs, metric, base0, s_end, step);
    const Trajectory t2 = integrate(rhs, metric, offset, s_end, step);

    OracleDeviation out;
    const std::size_t n = std::min(t1.samples.size(), t2.samples.size());
    out.s.reserve(n);
    out.psi.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.s.push_back(t1.samples[i].s);
        Vec4 d;
        for (int c = 0; c < 4; ++c) d[c] = (t2.samples[i].x[c] - t1.samples[i].x[c]) / eps;
        out.psi.push_back(d);
    }
    if (t1.status != TrajectoryStatus::complete || t2.status != TrajectoryStatus::complete)
        out.status = TrajectoryStatus::domain_error;
    return out;
}

double relative_sup_norm_error(const PairedTrajectory& integrated, const OracleDeviation& oracle) {
    const std::size_t n = std::min(integrated.samples.size(), oracle.psi.size());
    if (n == 0) throw GridMismatch("relative_sup_norm_error: empty inputs");
    double sup_diff = 0.0, sup_ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(integrated.samples[i].s - oracle.s[i]) > 1e-9)
            throw GridMismatch("relative_sup_norm_error: s grids differ");
        double d2 = 0.0, r2 = 0.0;
        for (int c = 0; c < 4; ++c) {
            const double d = integrated.samples[i].psi[c] - oracle.psi[i][c];
            d2 += d * d;
            r2 += oracle.psi[i][c] * oracle.psi[i][c];
        }
        sup_diff = std::max(sup_diff, std::sqrt(d2));
        sup_ref = std::max(sup_ref, std::sqrt(r2));
    }
    if (sup_ref == 0.0) return sup_diff;
    return sup_diff / sup_ref;
}

}  // namespace fsp
