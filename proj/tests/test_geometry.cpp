#include <doctest.h>

#include <cmath>
#include <vector>

#include "fsp/geometry.hpp"
#include "fsp/motion.hpp"
#include "fsp/rng.hpp"

using namespace fsp;

namespace {

ChartPoint pt(double t, double x1, double x2, double x3) {
    ChartPoint p;
    p.coords = {t, x1, x2, x3};
    return p;
}

}  // namespace

TEST_CASE("minkowski metric is diag(-1,1,1,1) everywhere") {
    const MetricField g = make_minkowski();
    const Mat4 m = metric_components(g, pt(12.0, -3.0, 0.5, 100.0));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(m[i][j] == (i == j ? (i == 0 ? -1.0 : 1.0) : 0.0));

    const Mat4 inv = inverse_metric(g, pt(0, 0, 0, 0));
    for (int i = 0; i < 4; ++i) CHECK(inv[i][i] == doctest::Approx(i == 0 ? -1.0 : 1.0));
}

TEST_CASE("schwarzschild closed-form components") {
    // g_tt = -(1 - 2M/r): M=1, r=4 -> -0.5; g^tt = 1/g_tt = -2.
    const MetricField g = make_schwarzschild(1.0);
    const ChartPoint x = pt(0.0, 4.0, M_PI / 2, 0.0);
    CHECK(metric_components(g, x)[0][0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(inverse_metric(g, x)[0][0] == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("schwarzschild horizon margin excludes r = 2M") {
    const MetricField g = make_schwarzschild(1.0, 1e-3);
    CHECK_THROWS_AS(metric_components(g, pt(0, 2.0, M_PI / 2, 0)), DomainError);
    CHECK_THROWS_AS(metric_components(g, pt(0, 2.0005, M_PI / 2, 0)), DomainError);
    CHECK_NOTHROW(metric_components(g, pt(0, 2.1, M_PI / 2, 0)));
}

TEST_CASE("near-singular metric reports SingularMetric") {
    MetricField tiny("tiny", [](const ChartPoint&) {
        Mat4 m{};
        m[0][0] = m[1][1] = m[2][2] = m[3][3] = 1e-4;  // det = 1e-16 < 1e-14
        return m;
    });
    CHECK_THROWS_AS(metric_components(tiny, pt(0, 0, 0, 0)), SingularMetric);
    CHECK_THROWS_AS(inverse_metric(tiny, pt(0, 0, 0, 0)), SingularMetric);
}

TEST_CASE("christoffel: minkowski vanishes, schwarzschild matches closed form") {
    const MetricField mink = make_minkowski();
    const Ten3 zero = christoffel(mink, pt(1, 2, 3, 4)).gamma;
    CHECK(max_abs(zero) == 0.0);

    // Gamma^r_tt = M(r - 2M)/r^3 = (4 - 2)/64 = 0.03125 at M=1, r=4.
    const MetricField schw = make_schwarzschild(1.0);
    const ChartPoint x = pt(0.0, 4.0, M_PI / 2, 0.0);
    CHECK(christoffel(schw, x).gamma[1][0][0] == doctest::Approx(0.03125).epsilon(1e-13));
}

TEST_CASE("finite-difference christoffel agrees with the exact evaluator") {
    const MetricField schw = make_schwarzschild(1.0);
    const ChartPoint x = pt(0.0, 6.0, 1.1, 0.3);
    const Ten3 exact = christoffel(schw, x).gamma;
    const Ten3 fd = christoffel_fd(schw, x).gamma;
    for (int a = 0; a < 4; ++a)
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n)
                CHECK(std::abs(fd[a][m][n] - exact[a][m][n]) < 1e-6);
}

TEST_CASE("finite-difference christoffel converges at second order") {
    const MetricField schw = make_schwarzschild(1.0);
    const ChartPoint x = pt(0.0, 6.0, 1.2, 0.7);
    const Ten3 exact = christoffel(schw, x).gamma;
    auto err = [&](double h_rel) {
        const Ten3 fd = christoffel_fd(schw, x, h_rel).gamma;
        double e = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int m = 0; m < 4; ++m)
                for (int n = 0; n < 4; ++n)
                    e = std::max(e, std::abs(fd[a][m][n] - exact[a][m][n]));
        return e;
    };
    const double ratio = err(2e-3) / err(1e-3);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("finite-difference stencils respect the domain margin") {
    // a point valid by itself whose stencil crosses the horizon margin
    const MetricField schw = make_schwarzschild(1.0, 1e-3);
    const double r = 2.0 + 1e-3 + 1e-5;  // inside margin + 2h for h_rel = 1e-3
    CHECK_NOTHROW(metric_components(schw, pt(0, r, M_PI / 2, 0)));
    CHECK_THROWS_AS(christoffel_fd(schw, pt(0, r, M_PI / 2, 0), 1e-3), DomainError);
}

TEST_CASE("riemann: flat space vanishes, schwarzschild invariants") {
    const MetricField mink = make_minkowski();
    CHECK(max_abs(riemann(mink, pt(0, 1, 2, 3)).riemann) == 0.0);

    const MetricField schw = make_schwarzschild(1.0);
    // Kretschmann = 48 M^2 / r^6; at r = 2.5 that is 48/244.140625 = 0.196608.
    const ChartPoint x = pt(0.0, 2.5, M_PI / 2, 1.0);
    CHECK(kretschmann(schw, x) == doctest::Approx(48.0 / std::pow(2.5, 6)).epsilon(1e-4));

    // Vacuum solution: Ricci scalar ~ 0 at any valid radius.
    for (double r : {2.2, 3.0, 6.0, 15.0})
        CHECK(std::abs(riemann(schw, pt(0.4, r, 1.0, 2.0)).scalar) < 1e-6);
}

TEST_CASE("tensor symmetries at random interior points") {
    std::vector<MetricField> metrics;
    metrics.push_back(make_minkowski());
    metrics.push_back(make_schwarzschild(1.0));
    metrics.push_back(make_weak_field(0.2));

    RngStream rng(12345, 7);
    for (const auto& metric : metrics) {
        for (int trial = 0; trial < 100; ++trial) {
            const ChartPoint x = metric.random_interior_point(rng);
            const Mat4 g = metric_components(metric, x);
            CHECK(symmetry_defect(g) == 0.0);

            const Mat4 ginv = inverse_metric(metric, x);
            const Mat4 prod = matmul(g, ginv);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    CHECK(std::abs(prod[i][j] - (i == j ? 1.0 : 0.0)) < 1e-12);

            const Ten3 gamma = christoffel(metric, x).gamma;
            for (int a = 0; a < 4; ++a)
                for (int m = 0; m < 4; ++m)
                    for (int n = m + 1; n < 4; ++n) CHECK(gamma[a][m][n] == gamma[a][n][m]);

            const Ten4 r = riemann(metric, x).riemann;
            double scale = std::max(1e-12, max_abs(r));
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    for (int c = 0; c < 4; ++c)
                        for (int d = 0; d < 4; ++d) {
                            CHECK(r[a][b][c][d] == -r[a][b][d][c]);
                            const double cyc =
                                r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c];
                            CHECK(std::abs(cyc) < 1e-7 * scale + 1e-10);
                        }
        }
    }
}

TEST_CASE("bazanski action: trivial cases") {
    const MetricField mink = make_minkowski();
    const int n = 11;
    std::vector<double> s(n);
    std::vector<ChartPoint> x(n);
    std::vector<Vec4> u(n), rate(n);
    for (int i = 0; i < n; ++i) {
        s[i] = 0.3 * i;
        x[i] = pt(s[i], 0, 0, 0);
        u[i] = {1, 0, 0, 0};
        rate[i] = {0, 0, 0, 0};
    }
    CHECK(bazanski_action(mink, s, x, u, rate) == 0.0);

    // constant U, Psi linear in s: action = g(U, Psidot) * (s1 - s0)
    const Vec4 psidot{0.0, 0.25, 0.5, 0.0};
    for (int i = 0; i < n; ++i) rate[i] = psidot;
    const double span = s[n - 1] - s[0];
    const Mat4 g = metric_components(mink, x[0]);
    CHECK(bazanski_action(mink, s, x, u, rate) ==
          doctest::Approx(dot(g, u[0], psidot) * span).epsilon(1e-14));

    std::vector<double> bad = s;
    bad[3] = bad[2];
    CHECK_THROWS_AS(bazanski_action(mink, bad, x, u, rate), GridMismatch);
}

namespace {

// Discrete Bazanski action as a function of the interior Psi samples: the
// covariant rate is rebuilt from Psi by central differences plus the
// connection term, so dA/dPsi probes the geodesic equation of the base orbit.
double action_of_psi(const MetricField& metric, const std::vector<double>& s,
                     const std::vector<ChartPoint>& x, const std::vector<Vec4>& u,
                     const std::vector<Vec4>& psi) {
    const std::size_t n = s.size();
    std::vector<Vec4> rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec4 w{};
        if (i > 0 && i + 1 < n) {
            for (int c = 0; c < 4; ++c)
                w[c] = (psi[i + 1][c] - psi[i - 1][c]) / (s[i + 1] - s[i - 1]);
        } else if (i == 0) {
            for (int c = 0; c < 4; ++c) w[c] = (psi[1][c] - psi[0][c]) / (s[1] - s[0]);
        } else {
            for (int c = 0; c < 4; ++c)
                w[c] = (psi[n - 1][c] - psi[n - 2][c]) / (s[n - 1] - s[n - 2]);
        }
        const Ten3 gamma = christoffel(metric, x[i]).gamma;
        for (int a = 0; a < 4; ++a) {
            double v = w[a];
            for (int m = 0; m < 4; ++m)
                for (int nn = 0; nn < 4; ++nn) v += gamma[a][m][nn] * u[i][m] * psi[i][nn];
            rate[i][a] = v;
        }
    }
    return bazanski_action(metric, s, x, u, rate);
}

}  // namespace

TEST_CASE("discrete bazanski action is stationary exactly on geodesics") {
    const MetricField schw = make_schwarzschild(1.0);
    const double r = 6.0;
    const Vec4 u_circ = circular_orbit_velocity(1.0, r);

    const int n = 2001;
    const double ds = 1e-3;
    std::vector<double> s(n);
    std::vector<ChartPoint> x(n);
    std::vector<Vec4> u(n), psi(n);
    for (int i = 0; i < n; ++i) {
        s[i] = ds * i;
        // exact circular geodesic: r, theta constant; t, phi linear in s
        x[i] = pt(u_circ[0] * s[i], r, M_PI / 2, u_circ[3] * s[i]);
        u[i] = u_circ;
        psi[i] = {0.0, 0.02 * std::sin(0.05 * s[i]), 0.0, 0.01 * std::cos(0.05 * s[i])};
    }

    // gradient of the discrete action with respect to one interior sample
    auto grad_at = [&](std::vector<Vec4>& field, int j) {
        Vec4 g{};
        const double eps = 1e-6;
        for (int c = 0; c < 4; ++c) {
            const double keep = field[j][c];
            field[j][c] = keep + eps;
            const double ap = action_of_psi(schw, s, x, u, field);
            field[j][c] = keep - eps;
            const double am = action_of_psi(schw, s, x, u, field);
            field[j][c] = keep;
            g[c] = (ap - am) / (2.0 * eps);
        }
        return g;
    };

    double gmax = 0.0;
    for (int j : {500, 1000, 1500}) {
        const Vec4 g = grad_at(psi, j);
        gmax = std::max(gmax, max_abs(g));
    }
    // scale: typical |dA| contribution of one sample
    const double scale = 1.0;
    CHECK(gmax < 1e-6 * scale);

    // a non-geodesic base flow must break stationarity, with clear separation
    // from the geodesic-case gradient bound
    std::vector<Vec4> u_bad = u;
    for (int i = 0; i < n; ++i) u_bad[i][1] += 0.5;
    auto grad_bad = [&](int j) {
        Vec4 g{};
        const double eps = 1e-6;
        for (int c = 0; c < 4; ++c) {
            const double keep = psi[j][c];
            psi[j][c] = keep + eps;
            const double ap = action_of_psi(schw, s, x, u_bad, psi);
            psi[j][c] = keep - eps;
            const double am = action_of_psi(schw, s, x, u_bad, psi);
            psi[j][c] = keep;
            g[c] = (ap - am) / (2.0 * eps);
        }
        return g;
    };
    MESSAGE("geodesic-case gradient = ", gmax, ", perturbed-case gradient = ",
            max_abs(grad_bad(1000)));
    CHECK(max_abs(grad_bad(1000)) > 10.0 * gmax);
    CHECK(max_abs(grad_bad(1000)) > 5e-6);
}
