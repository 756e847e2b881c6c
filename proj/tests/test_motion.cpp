#include <doctest.h>

#include <cmath>

#include "fsp/motion.hpp"

using namespace fsp;

namespace {

ChartPoint pt(double t, double x1, double x2, double x3) {
    ChartPoint p;
    p.coords = {t, x1, x2, x3};
    return p;
}

Rhs geodesic(const MetricField& m) {
    return [&m](const ParticleState& s) { return geodesic_rhs(m, s); };
}

}  // namespace

TEST_CASE("flat-space geodesics are straight worldlines to round-off") {
    const MetricField mink = make_minkowski();
    ParticleState st{0.0, pt(0, 0, 0, 0), {1.0, 0.25, -0.5, 0.125}};
    const StateDeriv d = geodesic_rhs(mink, st);
    CHECK(max_abs(d.du) == 0.0);

    const Trajectory traj = integrate(geodesic(mink), mink, st, 10.0, 0.1);
    REQUIRE(traj.samples.size() == 101);
    for (const auto& s : traj.samples) {
        CHECK(s.x[1] == doctest::Approx(0.25 * s.s).epsilon(1e-14));
        CHECK(s.x[2] == doctest::Approx(-0.5 * s.s).epsilon(1e-14));
        CHECK(s.u[0] == 1.0);
    }
}

TEST_CASE("schwarzschild circular orbit: angular velocity and norm drift") {
    // Omega^2 = M/r^3 = 1/216 at M=1, r=6; U is normalized timelike, so
    // g U U = -1 must persist over ten orbits.
    const MetricField schw = make_schwarzschild(1.0);
    const double r = 6.0;
    const Vec4 u0 = circular_orbit_velocity(1.0, r);
    ParticleState st{0.0, pt(0, r, M_PI / 2, 0), u0};
    CHECK(dot(metric_components(schw, st.x), u0, u0) == doctest::Approx(-1.0).epsilon(1e-14));

    const double omega = std::sqrt(1.0 / 216.0);
    const double orbit_proper = 2.0 * M_PI / (omega * u0[0]);
    const Trajectory traj = integrate(geodesic(schw), schw, st, 10.0 * orbit_proper, 0.05);
    REQUIRE(traj.status == TrajectoryStatus::complete);

    CHECK(norm_drift(traj) < 1e-9);

    const auto& last = traj.back();
    const double omega_measured = last.x[3] / last.x[0];  // dphi/dt along the orbit
    CHECK(omega_measured * omega_measured == doctest::Approx(1.0 / 216.0).epsilon(1e-6));
}

TEST_CASE("geodesic rhs propagates the domain error") {
    const MetricField schw = make_schwarzschild(1.0);
    ParticleState st{0.0, pt(0, 2.0005, M_PI / 2, 0), {1, 0, 0, 0}};
    CHECK_THROWS_AS(geodesic_rhs(schw, st), DomainError);
}

TEST_CASE("lorentz: zero charge reduces bitwise to the geodesic rhs") {
    const MetricField schw = make_schwarzschild(1.0);
    ParticleState st{0.0, pt(0, 8.0, M_PI / 2, 0.3), {1.2, 0.1, 0.0, 0.05}};
    ParticleProperties props;
    props.mass = 2.0;
    props.charge = 0.0;
    const EMFieldTensor em = constant_em_field({1, 0, 0}, {0, 0, 1});
    const StateDeriv a = geodesic_rhs(schw, st);
    const StateDeriv b = lorentz_rhs(schw, em, props, st);
    for (int c = 0; c < 4; ++c) {
        CHECK(a.du[c] == b.du[c]);
        CHECK(a.dx[c] == b.dx[c]);
    }
}

TEST_CASE("lorentz: gyroradius in a constant magnetic field") {
    // v = 0.5 along x, B_z = 1, e/m = 1: radius = gamma m v / (e B), with
    // gamma = 1/sqrt(0.75); the gyration period in proper time is 2 pi m/(eB).
    const MetricField mink = make_minkowski();
    const double v = 0.5;
    const double gamma = 1.0 / std::sqrt(1.0 - v * v);
    const double radius = gamma * v;  // 0.57735...
    ParticleProperties props;
    props.mass = 1.0;
    props.charge = 1.0;
    const EMFieldTensor em = constant_em_field({0, 0, 0}, {0, 0, 1});
    ParticleState st{0.0, pt(0, 0, 0, 0), {gamma, gamma * v, 0.0, 0.0}};

    auto rhs = [&](const ParticleState& s) { return lorentz_rhs(mink, em, props, s); };
    const double period = 2.0 * M_PI;  // proper-time gyration period for e B/m = 1
    const Trajectory traj = integrate(rhs, mink, st, period, 1e-3);

    CHECK(norm_drift(traj) < 1e-9);
    double x_min = 1e300, x_max = -1e300;
    for (const auto& s : traj.samples) {
        x_min = std::min(x_min, s.x[1]);
        x_max = std::max(x_max, s.x[1]);
    }
    CHECK(0.5 * (x_max - x_min) == doctest::Approx(radius).epsilon(1e-5));
}

TEST_CASE("lorentz: uniformly accelerated worldline is hyperbolic") {
    // E_x = 1, e/m = 1, start at rest: x(tau) = cosh(tau) - 1.
    const MetricField mink = make_minkowski();
    ParticleProperties props;
    props.mass = 1.0;
    props.charge = 1.0;
    const EMFieldTensor em = constant_em_field({1, 0, 0}, {0, 0, 0});
    ParticleState st{0.0, pt(0, 0, 0, 0), {1, 0, 0, 0}};
    auto rhs = [&](const ParticleState& s) { return lorentz_rhs(mink, em, props, s); };
    const Trajectory traj = integrate(rhs, mink, st, 1.0, 1e-3);
    CHECK(traj.back().x[1] == doctest::Approx(std::cosh(1.0) - 1.0).epsilon(1e-6));
    CHECK(traj.back().x[0] == doctest::Approx(std::sinh(1.0)).epsilon(1e-6));
}

TEST_CASE("papapetrou: zero spin and flat space reduce to the geodesic rhs") {
    const MetricField schw = make_schwarzschild(1.0);
    ParticleState st{0.0, pt(0, 7.0, M_PI / 2, 0.1), {1.1, 0.02, 0.0, 0.04}};
    ParticleProperties props;
    props.mass = 1.0;

    const StateDeriv a = geodesic_rhs(schw, st);
    const StateDeriv b = papapetrou_rhs(schw, props, st);
    for (int c = 0; c < 4; ++c) CHECK(a.du[c] == b.du[c]);

    const MetricField mink = make_minkowski();
    ParticleState flat{0.0, pt(0, 1, 2, 3), {1.0, 0.3, 0.0, 0.0}};
    props.spin = SpinTensor::from_upper(0.1, -0.2, 0.3, 0.4, -0.5, 0.6);
    const StateDeriv c1 = geodesic_rhs(mink, flat);
    const StateDeriv c2 = papapetrou_rhs(mink, props, flat);
    for (int c = 0; c < 4; ++c) CHECK(c1.du[c] == c2.du[c]);
}

TEST_CASE("papapetrou: orbit displacement scales linearly in a small spin") {
    const MetricField schw = make_schwarzschild(1.0);
    const double r = 6.0;
    const Vec4 u0 = circular_orbit_velocity(1.0, r);
    ParticleState st{0.0, pt(0, r, M_PI / 2, 0), u0};

    auto endpoint = [&](double eps) {
        ParticleProperties props;
        props.mass = 1.0;
        // S^{tr}: couples to R^r_{ttr} U^t, so the force acts radially
        props.spin = SpinTensor::from_upper(eps, 0, 0, 0, 0, 0);
        auto rhs = [&](const ParticleState& s) { return papapetrou_rhs(schw, props, s); };
        return integrate(rhs, schw, st, 30.0, 0.02).back();
    };
    const TrajectorySample base = endpoint(0.0);
    auto displacement = [&](double eps) {
        const TrajectorySample e = endpoint(eps);
        double d2 = 0.0;
        for (int c = 0; c < 4; ++c) d2 += (e.x[c] - base.x[c]) * (e.x[c] - base.x[c]);
        return std::sqrt(d2);
    };
    const double ratio = displacement(1e-4) / displacement(5e-5);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("dixon: reductions and exact force additivity") {
    const MetricField schw = make_schwarzschild(1.0);
    ParticleState st{0.0, pt(0, 6.5, M_PI / 2, 0.2), circular_orbit_velocity(1.0, 6.5)};
    ParticleProperties props;
    props.mass = 1.5;
    props.charge = 0.3;
    props.spin = SpinTensor::from_upper(0, 0.01, 0, 0.02, 0, -0.01);
    const EMFieldTensor em = constant_em_field({0.01, 0, 0}, {0, 0, 0.02});

    ParticleProperties neutral;
    neutral.mass = 1.5;
    const StateDeriv geo = geodesic_rhs(schw, st);
    const StateDeriv dix0 = dixon_rhs(schw, em, neutral, st);
    for (int c = 0; c < 4; ++c) CHECK(geo.du[c] == dix0.du[c]);

    // dixon adds the lorentz and papapetrou force terms in this order
    const Vec4 lf = lorentz_force(schw, em, props, st);
    const Vec4 pf = papapetrou_force(schw, props, st);
    const StateDeriv dix = dixon_rhs(schw, em, props, st);
    for (int c = 0; c < 4; ++c) {
        double expected = geo.du[c];
        expected += lf[c];
        expected += pf[c];
        CHECK(dix.du[c] == expected);
    }
}

TEST_CASE("dixon: charged spinning orbit stays finite (regression snapshot)") {
    const MetricField schw = make_schwarzschild(1.0);
    ParticleState st{0.0, pt(0, 6.0, M_PI / 2, 0), circular_orbit_velocity(1.0, 6.0)};
    ParticleProperties props;
    props.mass = 1.0;
    props.charge = 0.05;
    props.spin = SpinTensor::from_upper(0, 0, 0, 0.01, 0, 0);
    const EMFieldTensor em = constant_em_field({0.01, 0, 0}, {0, 0.02, 0});
    auto rhs = [&](const ParticleState& s) { return dixon_rhs(schw, em, props, s); };
    const Trajectory traj = integrate(rhs, schw, st, 20.0, 0.02);
    REQUIRE(traj.status == TrajectoryStatus::complete);
    for (int c = 0; c < 4; ++c) CHECK(std::isfinite(traj.back().x[c]));
    MESSAGE("dixon norm drift over s=20: ", norm_drift(traj));

    // endpoint frozen from the first validated run
    const Vec4 snap_x{28.221435740852943, 6.0814713086753498, 1.5708270746607926,
                      1.907303988678245};
    const Vec4 snap_u{1.4048644312325362, 0.0081426618089594383, 3.9936227166193988e-06,
                      0.093666331911758396};
    for (int c = 0; c < 4; ++c) {
        CHECK(std::abs(traj.back().x[c] - snap_x[c]) < 1e-9 * (1.0 + std::abs(snap_x[c])));
        CHECK(std::abs(traj.back().u[c] - snap_u[c]) < 1e-9 * (1.0 + std::abs(snap_u[c])));
    }
}

TEST_CASE("rk4 integration converges at fourth order on an eccentric orbit") {
    // a circular orbit is an exact fixed point of the stepper (the stages see
    // identical connection values), so the convergence probe needs radial
    // motion: boost the angular velocity at r=10 by 5% and renormalize U^t
    const MetricField schw = make_schwarzschild(1.0);
    const double r = 10.0;
    Vec4 u0 = circular_orbit_velocity(1.0, r);
    u0[3] *= 1.05;
    const ChartPoint x0 = pt(0, r, M_PI / 2, 0);
    const Mat4 g = metric_components(schw, x0);
    u0[0] = std::sqrt((1.0 + g[3][3] * u0[3] * u0[3]) / (-g[0][0]));
    ParticleState st{0.0, x0, u0};
    const double s_end = 40.0;

    const TrajectorySample ref = integrate(geodesic(schw), schw, st, s_end, 0.0125).back();
    auto endpoint_error = [&](double step) {
        const TrajectorySample e = integrate(geodesic(schw), schw, st, s_end, step).back();
        double d = 0.0;
        for (int c = 0; c < 4; ++c) d = std::max(d, std::abs(e.x[c] - ref.x[c]));
        return d;
    };
    const double ratio = endpoint_error(0.2) / endpoint_error(0.1);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("global step halving stops once the endpoint settles") {
    const MetricField schw = make_schwarzschild(1.0);
    const double r = 10.0;
    Vec4 u0 = circular_orbit_velocity(1.0, r);
    u0[3] *= 1.05;
    const ChartPoint x0 = pt(0, r, M_PI / 2, 0);
    const Mat4 g = metric_components(schw, x0);
    u0[0] = std::sqrt((1.0 + g[3][3] * u0[3] * u0[3]) / (-g[0][0]));
    ParticleState st{0.0, x0, u0};

    const Trajectory adaptive = integrate_adaptive(geodesic(schw), schw, st, 40.0, 0.4, 1e-10);
    const Trajectory fine = integrate(geodesic(schw), schw, st, 40.0, 0.0125);
    for (int c = 0; c < 4; ++c)
        CHECK(std::abs(adaptive.back().x[c] - fine.back().x[c]) < 1e-8);
    CHECK(adaptive.samples.size() > 101);  // at least one halving happened
}

TEST_CASE("forward-then-backward integration returns to the start") {
    const MetricField schw = make_schwarzschild(1.0);
    ParticleState st{0.0, pt(0, 6.0, M_PI / 2, 0), circular_orbit_velocity(1.0, 6.0)};
    const Trajectory fwd = integrate(geodesic(schw), schw, st, 25.0, 0.01);
    ParticleState turn{fwd.back().s, ChartPoint{fwd.back().x}, fwd.back().u};
    const Trajectory bwd = integrate(geodesic(schw), schw, turn, 0.0, 0.01);
    for (int c = 0; c < 4; ++c) {
        CHECK(std::abs(bwd.back().x[c] - st.x[c]) < 1e-8);
        CHECK(std::abs(bwd.back().u[c] - st.u[c]) < 1e-8);
    }
}

TEST_CASE("mid-trajectory domain exit returns a partial trajectory with the mark") {
    const MetricField schw = make_schwarzschild(1.0);
    // radial plunge: drops through the horizon margin
    ParticleState st{0.0, pt(0, 3.0, M_PI / 2, 0), {2.0, -0.9, 0, 0}};
    const Trajectory traj = integrate(geodesic(schw), schw, st, 10.0, 0.01);
    CHECK(traj.status == TrajectoryStatus::domain_error);
    CHECK(!traj.error.empty());
    CHECK(traj.samples.size() > 1);
    CHECK(traj.samples.size() < 1002);
}

TEST_CASE("a non-finite metric aborts the integration") {
    MetricField broken("broken", [](const ChartPoint& p) {
        Mat4 g{};
        g[0][0] = -1.0;
        g[1][1] = g[2][2] = g[3][3] = 1.0;
        if (p[1] > 0.5) g[1][1] = std::nan("");
        return g;
    });
    ParticleState st{0.0, pt(0, 0, 0, 0), {1, 0.3, 0, 0}};
    auto rhs = [&broken](const ParticleState& s) { return geodesic_rhs(broken, s); };
    CHECK_THROWS_AS(integrate(rhs, broken, st, 10.0, 0.1), NonFiniteResult);
}

TEST_CASE("spin supplementary condition projects S onto the U-orthogonal plane") {
    const MetricField schw = make_schwarzschild(1.0);
    const ChartPoint x = pt(0, 6.0, M_PI / 2, 0);
    const Vec4 u = circular_orbit_velocity(1.0, 6.0);
    const SpinTensor s0 = SpinTensor::from_upper(0.3, -0.1, 0.2, 0.5, 0.1, -0.4);
    const SpinTensor s1 = apply_spin_supplementary_condition(schw, x, u, s0);
    const Mat4 g = metric_components(schw, x);
    const Vec4 u_low = matvec(g, u);
    for (int a = 0; a < 4; ++a) {
        double c = 0.0;
        for (int d = 0; d < 4; ++d) c += s1.s[a][d] * u_low[d];
        CHECK(std::abs(c) < 1e-12);
        for (int b = 0; b < 4; ++b) CHECK(s1.s[a][b] == -s1.s[b][a]);
    }
}
