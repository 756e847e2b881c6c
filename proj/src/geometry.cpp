#include "fsp/geometry.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace fsp {

namespace {

std::string point_string(const ChartPoint& x) {
    std::ostringstream os;
    os << "(" << x[0] << ", " << x[1] << ", " << x[2] << ", " << x[3] << ")";
    return os.str();
}

// Per-axis finite-difference step, scaled with the coordinate magnitude.
Vec4 fd_steps(const ChartPoint& x, double h_rel) {
    Vec4 h;
    for (int m = 0; m < 4; ++m) h[m] = h_rel * std::max(1.0, std::abs(x[m]));
    return h;
}

}  // namespace

MetricField::MetricField(std::string name, Evaluator metric)
    : name_(std::move(name)), metric_(std::move(metric)) {}

bool MetricField::in_domain(const ChartPoint& x) const {
    if (!all_finite(x.coords)) return false;
    return domain_ ? domain_(x) : true;
}

Ten3 MetricField::exact_connection(const ChartPoint& x) const {
    return connection_(x);
}

ChartPoint MetricField::random_interior_point(RngStream& rng) const {
    if (sampler_) return sampler_(rng);
    ChartPoint p;
    for (int m = 0; m < 4; ++m) p[m] = 10.0 * rng.uniform() - 5.0;
    return p;
}

MetricField& MetricField::set_domain(DomainPredicate p) {
    domain_ = std::move(p);
    return *this;
}
MetricField& MetricField::set_exact_connection(ConnectionEvaluator c) {
    connection_ = std::move(c);
    return *this;
}
MetricField& MetricField::set_interior_sampler(InteriorSampler s) {
    sampler_ = std::move(s);
    return *this;
}
MetricField& MetricField::set_det_floor(double f) {
    det_floor_ = f;
    return *this;
}
MetricField& MetricField::set_fd_rel_step(double h) {
    fd_rel_step_ = h;
    return *this;
}

MetricField make_minkowski() {
    MetricField m("minkowski", [](const ChartPoint&) {
        Mat4 g{};
        g[0][0] = -1.0;
        g[1][1] = g[2][2] = g[3][3] = 1.0;
        return g;
    });
    m.set_exact_connection([](const ChartPoint&) { return Ten3{}; });
    return m;
}

MetricField make_schwarzschild(double mass, double horizon_margin) {
    const double M = mass;
    MetricField m("schwarzschild", [M](const ChartPoint& x) {
        const double r = x[1], th = x[2];
        const double f = 1.0 - 2.0 * M / r;
        const double st = std::sin(th);
        Mat4 g{};
        g[0][0] = -f;
        g[1][1] = 1.0 / f;
        g[2][2] = r * r;
        g[3][3] = r * r * st * st;
        return g;
    });
    m.set_domain([M, horizon_margin](const ChartPoint& x) {
        return x[1] > 2.0 * M + horizon_margin;
    });
    m.set_exact_connection([M](const ChartPoint& x) {
        const double r = x[1], th = x[2];
        const double f = 1.0 - 2.0 * M / r;
        const double st = std::sin(th), ct = std::cos(th);
        Ten3 c{};
        c[0][0][1] = c[0][1][0] = M / (r * r * f);
        c[1][0][0] = M * f / (r * r);
        c[1][1][1] = -M / (r * r * f);
        c[1][2][2] = -r * f;
        c[1][3][3] = -r * f * st * st;
        c[2][1][2] = c[2][2][1] = 1.0 / r;
        c[2][3][3] = -st * ct;
        c[3][1][3] = c[3][3][1] = 1.0 / r;
        c[3][2][3] = c[3][3][2] = ct / st;
        return c;
    });
    m.set_interior_sampler([M](RngStream& rng) {
        ChartPoint p;
        p[0] = 10.0 * rng.uniform() - 5.0;
        p[1] = (2.5 + 17.5 * rng.uniform()) * M;       // r in [2.5M, 20M]
        p[2] = 0.4 + (M_PI - 0.8) * rng.uniform();     // away from the poles
        p[3] = 2.0 * M_PI * rng.uniform();
        return p;
    });
    return m;
}

MetricField make_weak_field(double amplitude) {
    if (!(amplitude >= 0.0) || amplitude >= 0.45)
        throw Error("weak-field amplitude must be in [0, 0.45)");
    const double A = amplitude;
    // Plummer-softened point potential, softening length 1.
    auto phi = [A](const ChartPoint& x) {
        const double r2 = x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
        return -A / std::sqrt(r2 + 1.0);
    };
    MetricField m("weak-field", [phi](const ChartPoint& x) {
        const double p = phi(x);
        Mat4 g{};
        g[0][0] = -(1.0 + 2.0 * p);
        g[1][1] = g[2][2] = g[3][3] = 1.0 - 2.0 * p;
        return g;
    });
    m.set_interior_sampler([](RngStream& rng) {
        ChartPoint p;
        for (int mu = 0; mu < 4; ++mu) p[mu] = 6.0 * rng.uniform() - 3.0;
        return p;
    });
    return m;
}

MetricField make_metric(const std::string& name, const std::map<std::string, double>& params) {
    auto get = [&params](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (name == "minkowski") return make_minkowski();
    if (name == "schwarzschild") return make_schwarzschild(get("M", 1.0), get("margin", 1e-3));
    if (name == "weak-field") return make_weak_field(get("A", 0.1));
    throw Error("unknown metric '" + name + "'");
}

Mat4 metric_components(const MetricField& metric, const ChartPoint& x) {
    if (!metric.in_domain(x))
        throw DomainError(metric.name() + ": point outside chart domain " + point_string(x));
    Mat4 g = metric.raw_components(x);
    if (!all_finite(g))
        throw NonFiniteResult(metric.name() + ": non-finite metric at " + point_string(x));
    const double det = det4(g);
    if (std::abs(det) < metric.det_floor())
        throw SingularMetric(metric.name() + ": |det g| below floor at " + point_string(x));
    return g;
}

Mat4 inverse_metric(const MetricField& metric, const ChartPoint& x) {
    const Mat4 g = metric_components(metric, x);
    Mat4 inv;
    double det = 0.0;
    if (!invert4(g, inv, det) || std::abs(det) < metric.det_floor())
        throw SingularMetric(metric.name() + ": metric not invertible at " + point_string(x));
    // The inverse of a symmetric matrix is symmetric; restore it exactly.
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) inv[j][i] = inv[i][j] = 0.5 * (inv[i][j] + inv[j][i]);
    return inv;
}

ConnectionCoefficients christoffel_fd(const MetricField& metric, const ChartPoint& x,
                                      double h_rel) {
    if (h_rel <= 0.0) h_rel = metric.fd_rel_step();
    const Vec4 h = fd_steps(x, h_rel);

    // dg[m][b][n] = d_m g_{bn}
    Ten3 dg{};
    for (int m = 0; m < 4; ++m) {
        ChartPoint xp = x, xm = x;
        xp[m] += h[m];
        xm[m] -= h[m];
        const Mat4 gp = metric_components(metric, xp);
        const Mat4 gm = metric_components(metric, xm);
        const double inv2h = 1.0 / (2.0 * h[m]);
        for (int b = 0; b < 4; ++b)
            for (int n = 0; n < 4; ++n) dg[m][b][n] = (gp[b][n] - gm[b][n]) * inv2h;
    }

    const Mat4 ginv = inverse_metric(metric, x);
    ConnectionCoefficients out;
    for (int a = 0; a < 4; ++a)
        for (int m = 0; m < 4; ++m)
            for (int n = m; n < 4; ++n) {
                double s = 0.0;
                for (int b = 0; b < 4; ++b)
                    s += ginv[a][b] * (dg[m][b][n] + dg[n][b][m] - dg[b][m][n]);
                out.gamma[a][m][n] = out.gamma[a][n][m] = 0.5 * s;
            }
    if (!all_finite(out.gamma))
        throw NonFiniteResult(metric.name() + ": non-finite Christoffel at " + point_string(x));
    return out;
}

ConnectionCoefficients christoffel(const MetricField& metric, const ChartPoint& x, double h_rel) {
    if (metric.has_exact_connection()) {
        if (!metric.in_domain(x))
            throw DomainError(metric.name() + ": point outside chart domain " + point_string(x));
        ConnectionCoefficients out{metric.exact_connection(x)};
        if (!all_finite(out.gamma))
            throw NonFiniteResult(metric.name() + ": non-finite Christoffel at " + point_string(x));
        return out;
    }
    return christoffel_fd(metric, x, h_rel);
}

Ten4 connection_gradient(const MetricField& metric, const ChartPoint& x, double h_rel) {
    if (h_rel <= 0.0) h_rel = metric.fd_rel_step();
    const Vec4 h = fd_steps(x, h_rel);
    Ten4 grad{};
    for (int s = 0; s < 4; ++s) {
        ChartPoint xp = x, xm = x;
        xp[s] += h[s];
        xm[s] -= h[s];
        const Ten3 gp = christoffel(metric, xp, h_rel).gamma;
        const Ten3 gm = christoffel(metric, xm, h_rel).gamma;
        const double inv2h = 1.0 / (2.0 * h[s]);
        for (int a = 0; a < 4; ++a)
            for (int m = 0; m < 4; ++m)
                for (int n = 0; n < 4; ++n) grad[s][a][m][n] = (gp[a][m][n] - gm[a][m][n]) * inv2h;
    }
    return grad;
}

CurvatureTensor riemann(const MetricField& metric, const ChartPoint& x, double h_rel) {
    const Ten3 gamma = christoffel(metric, x, h_rel).gamma;
    const Ten4 dgamma = connection_gradient(metric, x, h_rel);

    CurvatureTensor out;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    double quad = 0.0;
                    for (int l = 0; l < 4; ++l)
                        quad += gamma[a][c][l] * gamma[l][b][d] - gamma[a][d][l] * gamma[l][b][c];
                    out.riemann[a][b][c][d] = dgamma[c][a][b][d] - dgamma[d][a][b][c] + quad;
                }
    if (!all_finite(out.riemann))
        throw NonFiniteResult(metric.name() + ": non-finite Riemann at " + point_string(x));

    for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d) {
            double s = 0.0;
            for (int a = 0; a < 4; ++a) s += out.riemann[a][b][a][d];
            out.ricci[b][d] = s;
        }
    const Mat4 ginv = inverse_metric(metric, x);
    out.scalar = 0.0;
    for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d) out.scalar += ginv[b][d] * out.ricci[b][d];
    return out;
}

double kretschmann(const MetricField& metric, const ChartPoint& x, double h_rel) {
    const CurvatureTensor curv = riemann(metric, x, h_rel);
    const Mat4 g = metric_components(metric, x);
    const Mat4 ginv = inverse_metric(metric, x);

    // Lower the first index, then contract with the all-upper version.
    Ten4 lower{};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    double s = 0.0;
                    for (int l = 0; l < 4; ++l) s += g[a][l] * curv.riemann[l][b][c][d];
                    lower[a][b][c][d] = s;
                }

    double k = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    double up = 0.0;
                    for (int a2 = 0; a2 < 4; ++a2)
                        for (int b2 = 0; b2 < 4; ++b2)
                            for (int c2 = 0; c2 < 4; ++c2)
                                for (int d2 = 0; d2 < 4; ++d2)
                                    up += ginv[a][a2] * ginv[b][b2] * ginv[c][c2] * ginv[d][d2] *
                                          lower[a2][b2][c2][d2];
                    k += lower[a][b][c][d] * up;
                }
    return k;
}

double bazanski_action(const MetricField& metric, std::span<const double> s,
                       std::span<const ChartPoint> x, std::span<const Vec4> u,
                       std::span<const Vec4> psi_cov_rate) {
    const std::size_t n = s.size();
    if (n < 2 || x.size() != n || u.size() != n || psi_cov_rate.size() != n)
        throw GridMismatch("bazanski_action: sample arrays disagree");
    for (std::size_t i = 1; i < n; ++i)
        if (!(s[i] > s[i - 1])) throw GridMismatch("bazanski_action: s grid not increasing");

    double action = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Mat4 g = metric_components(metric, x[i]);
        const double integrand = dot(g, u[i], psi_cov_rate[i]);
        if (i > 0) action += 0.5 * (integrand + prev) * (s[i] - s[i - 1]);
        prev = integrand;
    }
    return action;
}

}  // namespace fsp
