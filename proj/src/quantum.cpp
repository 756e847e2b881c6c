#include "fsp/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fsp {

namespace {

constexpr cplx kI{0.0, 1.0};

std::size_t locate(const std::vector<double>& times, double t) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double scale = std::max(1.0, std::abs(times[i]));
        if (std::abs(times[i] - t) <= 1e-12 * scale) return i;
    }
    throw Error("sampled path: t is not a grid point");
}

void check_path(const SampledPath& path) {
    if (path.times.size() < 3 || path.values.size() != path.times.size())
        throw GridMismatch("sampled path: need >= 3 samples with matching values");
    for (std::size_t i = 1; i < path.times.size(); ++i)
        if (!(path.times[i] > path.times[i - 1]))
            throw GridMismatch("sampled path: times not strictly increasing");
}

}  // namespace

double forward_derivative(const SampledPath& path, double t) {
    check_path(path);
    const std::size_t i = locate(path.times, t);
    if (i + 1 >= path.times.size())
        throw BoundaryError("forward_derivative: no right neighbor at grid end");
    return (path.values[i + 1] - path.values[i]) / (path.times[i + 1] - path.times[i]);
}

double backward_derivative(const SampledPath& path, double t) {
    check_path(path);
    const std::size_t i = locate(path.times, t);
    if (i == 0) throw BoundaryError("backward_derivative: no left neighbor at grid end");
    return (path.values[i] - path.values[i - 1]) / (path.times[i] - path.times[i - 1]);
}

SampledPath brownian_path(std::uint64_t seed, std::size_t n_steps, double dt, double diffusion) {
    RngStream rng(seed, 0);
    SampledPath p;
    p.times.reserve(n_steps + 1);
    p.values.reserve(n_steps + 1);
    double w = 0.0;
    p.times.push_back(0.0);
    p.values.push_back(w);
    const double sd = std::sqrt(2.0 * diffusion * dt);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        w += sd * rng.normal();
        p.times.push_back(static_cast<double>(k) * dt);
        p.values.push_back(w);
    }
    return p;
}

SampledPath subsample(const SampledPath& path, std::size_t k) {
    SampledPath out;
    for (std::size_t i = 0; i < path.times.size(); i += k) {
        out.times.push_back(path.times[i]);
        out.values.push_back(path.values[i]);
    }
    return out;
}

ComplexVelocityField complex_velocity(RealVectorField v_plus, RealVectorField v_minus) {
    ComplexVelocityField f;
    f.vplus = v_plus;
    f.vminus = v_minus;
    f.classical = [v_plus, v_minus](const Vec3& x, double t) {
        const Vec3 a = v_plus(x, t), b = v_minus(x, t);
        return Vec3{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
    };
    f.nondiff = [v_plus, v_minus](const Vec3& x, double t) {
        const Vec3 a = v_plus(x, t), b = v_minus(x, t);
        return Vec3{0.5 * (a[0] - b[0]), 0.5 * (a[1] - b[1]), 0.5 * (a[2] - b[2])};
    };
    auto classical = f.classical;
    auto nondiff = f.nondiff;
    f.value = [classical, nondiff](const Vec3& x, double t) {
        const Vec3 c = classical(x, t), n = nondiff(x, t);
        return CVec3{cplx(c[0], -n[0]), cplx(c[1], -n[1]), cplx(c[2], -n[2])};
    };
    return f;
}

Wavefunction plane_wave(const Vec3& k, double omega, double amplitude) {
    Wavefunction psi;
    psi.value = [k, omega, amplitude](const Vec3& x, double t) {
        const double phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2] - omega * t;
        return amplitude * std::exp(kI * phase);
    };
    auto value = psi.value;
    psi.gradient = [k, value](const Vec3& x, double t) {
        const cplx v = value(x, t);
        return CVec3{kI * k[0] * v, kI * k[1] * v, kI * k[2] * v};
    };
    psi.laplacian = [k, value](const Vec3& x, double t) {
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        return -k2 * value(x, t);
    };
    psi.time_derivative = [omega, value](const Vec3& x, double t) {
        return -kI * omega * value(x, t);
    };
    psi.grad_log = [k](const Vec3&, double) {
        return CVec3{kI * k[0], kI * k[1], kI * k[2]};
    };
    psi.laplacian_log = [](const Vec3&, double) { return cplx(0.0, 0.0); };
    psi.amplitude_floor = 1e-10 * amplitude;
    return psi;
}

Wavefunction gaussian_ground_state(double sigma, double amplitude) {
    const double s2 = sigma * sigma;
    Wavefunction psi;
    psi.value = [s2, amplitude](const Vec3& x, double) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return cplx(amplitude * std::exp(-r2 / (4.0 * s2)), 0.0);
    };
    auto value = psi.value;
    psi.gradient = [s2, value](const Vec3& x, double t) {
        const cplx v = value(x, t);
        const double c = -0.5 / s2;
        return CVec3{c * x[0] * v, c * x[1] * v, c * x[2] * v};
    };
    psi.laplacian = [s2, value](const Vec3& x, double t) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        const double c = -0.5 / s2;
        return value(x, t) * (3.0 * c + c * c * r2);
    };
    psi.time_derivative = [](const Vec3&, double) { return cplx(0.0, 0.0); };
    psi.grad_log = [s2](const Vec3& x, double) {
        const double c = -0.5 / s2;
        return CVec3{cplx(c * x[0], 0.0), cplx(c * x[1], 0.0), cplx(c * x[2], 0.0)};
    };
    psi.laplacian_log = [s2](const Vec3&, double) { return cplx(-1.5 / s2, 0.0); };
    psi.amplitude_floor = 1e-10 * amplitude;
    return psi;
}

Wavefunction excited_state_1d(double sigma) {
    const double s2 = sigma * sigma;
    Wavefunction psi;
    psi.value = [s2](const Vec3& x, double) {
        return cplx(x[0] * std::exp(-x[0] * x[0] / (4.0 * s2)), 0.0);
    };
    psi.amplitude_floor = 1e-6;
    psi.fd_step = 1e-5;
    return psi;
}

std::size_t WavefunctionGrid::index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(dims[1]) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(dims[2]) +
           static_cast<std::size_t>(k);
}

cplx WavefunctionGrid::at(int i, int j, int k) const {
    return values[index(i, j, k)];
}

Vec3 WavefunctionGrid::point(int i, int j, int k) const {
    return Vec3{origin[0] + i * spacing[0], origin[1] + j * spacing[1],
                origin[2] + k * spacing[2]};
}

WavefunctionGrid sample_to_grid(const Wavefunction& psi, const std::array<int, 3>& dims,
                                const std::array<double, 3>& spacing,
                                const std::array<double, 3>& origin, double time) {
    WavefunctionGrid g;
    g.dims = dims;
    g.spacing = spacing;
    g.origin = origin;
    g.time = time;
    g.amplitude_floor = psi.amplitude_floor;
    g.values.resize(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
    for (int i = 0; i < dims[0]; ++i)
        for (int j = 0; j < dims[1]; ++j)
            for (int k = 0; k < dims[2]; ++k) g.values[g.index(i, j, k)] = psi.value(g.point(i, j, k), time);
    return g;
}

void write_wavefunction_grid(const std::string& path, const WavefunctionGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    char buf[96];
    out << "# wavefunction grid\n";
    std::snprintf(buf, sizeof buf, "# dims %d %d %d\n", grid.dims[0], grid.dims[1], grid.dims[2]);
    out << buf;
    std::snprintf(buf, sizeof buf, "# spacing %.17g %.17g %.17g\n", grid.spacing[0],
                  grid.spacing[1], grid.spacing[2]);
    out << buf;
    std::snprintf(buf, sizeof buf, "# origin %.17g %.17g %.17g\n", grid.origin[0], grid.origin[1],
                  grid.origin[2]);
    out << buf;
    std::snprintf(buf, sizeof buf, "# time %.17g\n", grid.time);
    out << buf;
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", i, grid.values[i].real(),
                      grid.values[i].imag());
        out << buf;
    }
}

WavefunctionGrid read_wavefunction_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    WavefunctionGrid g;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream is(line.substr(1));
            std::string tag;
            is >> tag;
            if (tag == "dims") is >> g.dims[0] >> g.dims[1] >> g.dims[2];
            else if (tag == "spacing") is >> g.spacing[0] >> g.spacing[1] >> g.spacing[2];
            else if (tag == "origin") is >> g.origin[0] >> g.origin[1] >> g.origin[2];
            else if (tag == "time") is >> g.time;
            continue;
        }
        std::istringstream is(line);
        std::size_t idx;
        double re, im;
        if (!(is >> idx >> re >> im)) throw Error("bad grid row in '" + path + "'");
        if (g.values.size() <= idx) g.values.resize(idx + 1);
        g.values[idx] = cplx(re, im);
    }
    const std::size_t expected =
        static_cast<std::size_t>(g.dims[0]) * g.dims[1] * g.dims[2];
    if (g.values.size() != expected) throw GridMismatch("grid file row count != dims product");
    return g;
}

// --------------------------------------------------------------------------

namespace {

cplx value_checked(const Wavefunction& psi, const Vec3& x, double t) {
    const cplx v = psi.value(x, t);
    if (std::abs(v) < psi.amplitude_floor)
        throw AmplitudeFloor("|psi| below amplitude floor");
    return v;
}

CVec3 gradient_of(const Wavefunction& psi, const Vec3& x, double t) {
    if (psi.gradient) return psi.gradient(x, t);
    CVec3 g;
    for (int a = 0; a < 3; ++a) {
        Vec3 xp = x, xm = x;
        xp[a] += psi.fd_step;
        xm[a] -= psi.fd_step;
        g[a] = (psi.value(xp, t) - psi.value(xm, t)) / (2.0 * psi.fd_step);
    }
    return g;
}

cplx laplacian_of(const Wavefunction& psi, const Vec3& x, double t) {
    if (psi.laplacian) return psi.laplacian(x, t);
    cplx lap = 0.0;
    const cplx c = psi.value(x, t);
    for (int a = 0; a < 3; ++a) {
        Vec3 xp = x, xm = x;
        xp[a] += psi.fd_step;
        xm[a] -= psi.fd_step;
        lap += (psi.value(xp, t) - 2.0 * c + psi.value(xm, t)) / (psi.fd_step * psi.fd_step);
    }
    return lap;
}

cplx time_derivative_of(const Wavefunction& psi, const Vec3& x, double t) {
    if (psi.time_derivative) return psi.time_derivative(x, t);
    return (psi.value(x, t + psi.fd_dt) - psi.value(x, t - psi.fd_dt)) / (2.0 * psi.fd_dt);
}

CVec3 grad_log_of(const Wavefunction& psi, const Vec3& x, double t) {
    if (psi.grad_log) return psi.grad_log(x, t);
    const cplx v = value_checked(psi, x, t);
    CVec3 g = gradient_of(psi, x, t);
    for (auto& c : g) c /= v;
    return g;
}

cplx laplacian_log_of(const Wavefunction& psi, const Vec3& x, double t) {
    if (psi.laplacian_log) return psi.laplacian_log(x, t);
    // lap ln psi = lap psi / psi - (grad psi . grad psi) / psi^2
    const cplx v = value_checked(psi, x, t);
    const CVec3 g = gradient_of(psi, x, t);
    const cplx lap = laplacian_of(psi, x, t);
    cplx g2 = 0.0;
    for (const auto& c : g) g2 += c * c;
    return lap / v - g2 / (v * v);
}

}  // namespace

CVec3 velocity_from_wavefunction(const Wavefunction& psi, const QuantumParams& params,
                                 const Vec3& x, double t) {
    value_checked(psi, x, t);
    CVec3 gl = grad_log_of(psi, x, t);
    const cplx factor = -2.0 * kI * params.diffusion;
    for (auto& c : gl) c *= factor;
    return gl;
}

ComplexVelocityField velocity_field(const Wavefunction& psi, const QuantumParams& params) {
    ComplexVelocityField f;
    f.value = [psi, params](const Vec3& x, double t) {
        return velocity_from_wavefunction(psi, params, x, t);
    };
    auto value = f.value;
    f.classical = [value](const Vec3& x, double t) {
        const CVec3 v = value(x, t);
        return Vec3{v[0].real(), v[1].real(), v[2].real()};
    };
    f.nondiff = [value](const Vec3& x, double t) {
        const CVec3 v = value(x, t);
        return Vec3{-v[0].imag(), -v[1].imag(), -v[2].imag()};
    };
    f.vplus = [value](const Vec3& x, double t) {
        const CVec3 v = value(x, t);
        return Vec3{v[0].real() - v[0].imag(), v[1].real() - v[1].imag(),
                    v[2].real() - v[2].imag()};
    };
    f.vminus = [value](const Vec3& x, double t) {
        const CVec3 v = value(x, t);
        return Vec3{v[0].real() + v[0].imag(), v[1].real() + v[1].imag(),
                    v[2].real() + v[2].imag()};
    };
    return f;
}

cplx scale_derivative(const ScalarField& f, const ComplexVelocityField& v, const Vec3& x,
                      double t, bool extended, double diffusion) {
    cplx dt_term;
    if (f.time_derivative) {
        dt_term = f.time_derivative(x, t);
    } else {
        dt_term = (f.value(x, t + f.fd_dt) - f.value(x, t - f.fd_dt)) / (2.0 * f.fd_dt);
    }
    CVec3 grad;
    if (f.gradient) {
        grad = f.gradient(x, t);
    } else {
        for (int a = 0; a < 3; ++a) {
            Vec3 xp = x, xm = x;
            xp[a] += f.fd_step;
            xm[a] -= f.fd_step;
            grad[a] = (f.value(xp, t) - f.value(xm, t)) / (2.0 * f.fd_step);
        }
    }
    const CVec3 vel = v.value(x, t);
    cplx result = dt_term + vel[0] * grad[0] + vel[1] * grad[1] + vel[2] * grad[2];
    if (extended) {
        cplx lap;
        if (f.laplacian) {
            lap = f.laplacian(x, t);
        } else {
            const cplx c = f.value(x, t);
            lap = 0.0;
            for (int a = 0; a < 3; ++a) {
                Vec3 xp = x, xm = x;
                xp[a] += f.fd_step;
                xm[a] -= f.fd_step;
                lap += (f.value(xp, t) - 2.0 * c + f.value(xm, t)) / (f.fd_step * f.fd_step);
            }
        }
        result -= kI * diffusion * lap;
    }
    return result;
}

CVec3 fractal_geodesic_residual(const Wavefunction& psi, const QuantumParams& params,
                                const Vec3& x, double t) {
    auto vel = [&psi, &params](const Vec3& y, double tau) {
        return velocity_from_wavefunction(psi, params, y, tau);
    };
    const CVec3 v0 = vel(x, t);
    const double h = psi.fd_step;
    const double dt = psi.fd_dt;

    CVec3 res;
    const CVec3 vtp = vel(x, t + dt);
    const CVec3 vtm = vel(x, t - dt);
    for (int a = 0; a < 3; ++a) res[a] = (vtp[a] - vtm[a]) / (2.0 * dt);

    for (int b = 0; b < 3; ++b) {
        Vec3 xp = x, xm = x;
        xp[b] += h;
        xm[b] -= h;
        const CVec3 vp = vel(xp, t);
        const CVec3 vm = vel(xm, t);
        for (int a = 0; a < 3; ++a) res[a] += v0[b] * (vp[a] - vm[a]) / (2.0 * h);
    }
    return res;
}

cplx schrodinger_residual(const Wavefunction& psi, const QuantumParams& params, const Vec3& x,
                          double t) {
    const double d = params.diffusion;
    const cplx v = value_checked(psi, x, t);
    const cplx lap = laplacian_of(psi, x, t);
    const cplx dpsi_dt = time_derivative_of(psi, x, t);
    const cplx u = d * d * laplacian_log_of(psi, x, t);
    return d * d * lap + kI * d * dpsi_dt - u * v;
}

WavefunctionGrid schrodinger_residual_grid(const WavefunctionGrid& prev,
                                           const WavefunctionGrid& cur,
                                           const WavefunctionGrid& next,
                                           const QuantumParams& params) {
    if (prev.dims != cur.dims || next.dims != cur.dims || prev.values.size() != cur.values.size())
        throw GridMismatch("schrodinger_residual_grid: slices not on a common grid");
    const double dt_f = next.time - cur.time;
    const double dt_b = cur.time - prev.time;
    if (!(dt_f > 0.0) || std::abs(dt_f - dt_b) > 1e-12 * std::max(1.0, std::abs(dt_f)))
        throw GridMismatch("schrodinger_residual_grid: time stamps not uniform");

    WavefunctionGrid out = cur;
    std::fill(out.values.begin(), out.values.end(), cplx(0.0, 0.0));
    const double d = params.diffusion;

    const int ni = cur.dims[0], nj = cur.dims[1], nk = cur.dims[2];
    auto interior = [](int n, int i) { return n == 1 || (i > 0 && i < n - 1); };
    for (int i = 0; i < ni; ++i)
        for (int j = 0; j < nj; ++j)
            for (int k = 0; k < nk; ++k) {
                if (!(interior(ni, i) && interior(nj, j) && interior(nk, k))) continue;
                const cplx c = cur.at(i, j, k);
                if (std::abs(c) < cur.amplitude_floor)
                    throw AmplitudeFloor("schrodinger_residual_grid: |psi| below floor");

                cplx lap = 0.0;
                cplx grad2 = 0.0;
                for (int axis = 0; axis < 3; ++axis) {
                    if (cur.dims[axis] == 1) continue;
                    const int di = axis == 0 ? 1 : 0, dj = axis == 1 ? 1 : 0,
                              dk = axis == 2 ? 1 : 0;
                    const cplx p = cur.at(i + di, j + dj, k + dk);
                    const cplx m = cur.at(i - di, j - dj, k - dk);
                    const double hh = cur.spacing[axis];
                    lap += (p - 2.0 * c + m) / (hh * hh);
                    const cplx g = (p - m) / (2.0 * hh);
                    grad2 += g * g;
                }
                const cplx dpsi_dt =
                    (next.values[cur.index(i, j, k)] - prev.values[cur.index(i, j, k)]) /
                    (dt_f + dt_b);
                const cplx lap_log = lap / c - grad2 / (c * c);
                const cplx u = d * d * lap_log;
                out.values[out.index(i, j, k)] = d * d * lap + kI * d * dpsi_dt - u * c;
            }
    return out;
}

Vec3 nelson_drift(const Wavefunction& psi, const QuantumParams& params, const Vec3& x, double t) {
    value_checked(psi, x, t);
    const CVec3 gl = grad_log_of(psi, x, t);
    const double c = 2.0 * params.diffusion;
    // grad ln psi = grad R + i grad S; b+ = 2D grad S + 2D grad R
    return Vec3{c * (gl[0].imag() + gl[0].real()), c * (gl[1].imag() + gl[1].real()),
                c * (gl[2].imag() + gl[2].real())};
}

WalkerEnsemble init_walkers_uniform(std::size_t n, double half_width, const QuantumParams& params,
                                    std::uint64_t seed) {
    if (n < 1) throw Error("init_walkers_uniform: need at least one walker");
    WalkerEnsemble e;
    e.params = params;
    e.seed = seed;
    e.positions.resize(n);
    for (std::size_t w = 0; w < n; ++w) {
        RngStream rng(seed, static_cast<std::uint32_t>(w), 0xFFFFFFFFu);  // init slot
        for (int a = 0; a < 3; ++a) e.positions[w][a] = half_width * (2.0 * rng.uniform() - 1.0);
    }
    return e;
}

void walker_step(WalkerEnsemble& ensemble, const Wavefunction& psi, double dt) {
    if (!(dt > 0.0)) throw Error("walker_step: dt must be positive");
    const double sd = std::sqrt(2.0 * ensemble.params.diffusion * dt);
    const auto step_tag = static_cast<std::uint32_t>(ensemble.step_count);
    std::uint64_t rejected = 0;
    for (std::size_t w = 0; w < ensemble.positions.size(); ++w) {
        RngStream rng(ensemble.seed, static_cast<std::uint32_t>(w), step_tag);
        Vec3& x = ensemble.positions[w];
        Vec3 trial;
        bool ok = true;
        try {
            const Vec3 b = nelson_drift(psi, ensemble.params, x, ensemble.time);
            for (int a = 0; a < 3; ++a) trial[a] = x[a] + b[a] * dt + sd * rng.normal();
            if (std::abs(psi.value(trial, ensemble.time + dt)) < psi.amplitude_floor) ok = false;
        } catch (const AmplitudeFloor&) {
            ok = false;
        }
        if (ok) x = trial;
        else ++rejected;
    }
    ensemble.rejected += rejected;
    ensemble.time += dt;
    ensemble.step_count += 1;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw Error("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double normal_cdf(double x, double sigma) {
    return 0.5 * std::erfc(-x / (sigma * 1.4142135623730951));
}

Histogram walker_histogram(const WalkerEnsemble& ensemble, int axis, int bins, double lo,
                           double hi, const std::function<double(double)>& density) {
    Histogram h;
    h.centers.resize(bins);
    h.counts.assign(bins, 0.0);
    h.reference.resize(bins);
    const double width = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) h.centers[b] = lo + (b + 0.5) * width;
    for (const auto& p : ensemble.positions) {
        const int b = static_cast<int>(std::floor((p[axis] - lo) / width));
        if (b >= 0 && b < bins) h.counts[b] += 1.0;
    }
    const double n = static_cast<double>(ensemble.positions.size());
    for (int b = 0; b < bins; ++b) h.reference[b] = n * width * density(h.centers[b]);
    return h;
}

// --------------------------------------------------------------------------
// Chart-space operators

namespace {

Vec4 chart_fd_steps(const ChartPoint& x, double h_rel) {
    Vec4 h;
    for (int m = 0; m < 4; ++m) h[m] = h_rel * std::max(1.0, std::abs(x[m]));
    return h;
}

// Covariant derivative of a complex vector field: T^a_m = d_m V^a + Gamma^a_{ml} V^l.
// h holds one fixed step per axis so nested stencils stay uniform.
std::array<CVec4, 4> cov_deriv_vector(const ChartVectorField& field, const MetricField& metric,
                                      const ChartPoint& x, const Vec4& h) {
    const Ten3 gamma = christoffel(metric, x).gamma;
    const CVec4 v = field(x);
    std::array<CVec4, 4> t{};  // t[m][a]
    for (int m = 0; m < 4; ++m) {
        ChartPoint xp = x, xm = x;
        xp[m] += h[m];
        xm[m] -= h[m];
        const CVec4 vp = field(xp);
        const CVec4 vm = field(xm);
        for (int a = 0; a < 4; ++a) {
            cplx d = (vp[a] - vm[a]) / (2.0 * h[m]);
            for (int l = 0; l < 4; ++l) d += gamma[a][m][l] * v[l];
            t[m][a] = d;
        }
    }
    return t;
}

}  // namespace

CVec4 covariant_scale_derivative(const ChartVectorField& field, const MetricField& metric,
                                 const QuantumParams& params, const ChartPoint& x, double h_rel,
                                 const ChartVectorField* ds_term) {
    if (h_rel <= 0.0) h_rel = 1e-4;
    const Vec4 h = chart_fd_steps(x, h_rel);
    const CVec4 v = field(x);
    const Mat4 ginv = inverse_metric(metric, x);
    const std::array<CVec4, 4> t = cov_deriv_vector(field, metric, x, h);

    CVec4 result{};
    if (ds_term != nullptr) result = (*ds_term)(x);

    // advection V^m D_m V^a
    for (int a = 0; a < 4; ++a)
        for (int m = 0; m < 4; ++m) result[a] += v[m] * t[m][a];

    if (params.mu != 0.0) {
        // Vector Laplacian g^{mn} D_m (D V)^a_n by nested central differences.
        const Ten3 gamma = christoffel(metric, x).gamma;
        CVec4 lap{};
        for (int m = 0; m < 4; ++m) {
            ChartPoint xp = x, xm = x;
            xp[m] += h[m];
            xm[m] -= h[m];
            const auto tp = cov_deriv_vector(field, metric, xp, h);
            const auto tm = cov_deriv_vector(field, metric, xm, h);
            for (int n = 0; n < 4; ++n) {
                for (int a = 0; a < 4; ++a) {
                    cplx dm = (tp[n][a] - tm[n][a]) / (2.0 * h[m]);
                    for (int l = 0; l < 4; ++l) {
                        dm += gamma[a][m][l] * t[n][l];
                        dm -= gamma[l][m][n] * t[l][a];
                    }
                    lap[a] += ginv[m][n] * dm;
                }
            }
        }
        const double r = riemann(metric, x).scalar;
        const cplx c = -kI * params.mu;
        for (int a = 0; a < 4; ++a) result[a] += c * (lap[a] + params.xi * r * v[a]);
    }
    return result;
}

CVec4 klein_gordon_residual(const ChartScalarField& psi, const MetricField& metric,
                            const QuantumParams& params, const ChartPoint& x, double h_rel,
                            double amplitude_floor) {
    if (h_rel <= 0.0) h_rel = 1e-3;
    // One fixed step per axis, shared by every nested stencil.
    const Vec4 h = chart_fd_steps(x, h_rel);

    // phi_r(y) = D_r ln Psi = (d_r Psi) / Psi, branch-free.
    auto phi = [&psi, &h, amplitude_floor](const ChartPoint& y) {
        const cplx v = psi(y);
        if (std::abs(v) < amplitude_floor)
            throw AmplitudeFloor("klein_gordon_residual: |Psi| below floor");
        CVec4 g;
        for (int r = 0; r < 4; ++r) {
            ChartPoint yp = y, ym = y;
            yp[r] += h[r];
            ym[r] -= h[r];
            g[r] = (psi(yp) - psi(ym)) / (2.0 * h[r] * v);
        }
        return g;
    };

    // T_{nr}(y) = d_n phi_r - Gamma^l_{nr} phi_l  (covariant derivative of a covector)
    auto cov_t = [&phi, &metric, &h](const ChartPoint& y) {
        const Ten3 gamma = christoffel(metric, y).gamma;
        const CVec4 p = phi(y);
        std::array<CVec4, 4> t{};  // t[n][r]
        for (int n = 0; n < 4; ++n) {
            ChartPoint yp = y, ym = y;
            yp[n] += h[n];
            ym[n] -= h[n];
            const CVec4 pp = phi(yp);
            const CVec4 pm = phi(ym);
            for (int r = 0; r < 4; ++r) {
                cplx d = (pp[r] - pm[r]) / (2.0 * h[n]);
                for (int l = 0; l < 4; ++l) d -= gamma[l][n][r] * p[l];
                t[n][r] = d;
            }
        }
        return t;
    };

    const Mat4 ginv = inverse_metric(metric, x);
    const CVec4 p0 = phi(x);
    const auto t0 = cov_t(x);

    CVec4 result{};
    const double l2 = params.lambda * params.lambda;
    // term 1: lambda^2 g^{mn} phi_n T_{mr}
    for (int r = 0; r < 4; ++r) {
        cplx acc = 0.0;
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n) acc += ginv[m][n] * p0[n] * t0[m][r];
        result[r] = l2 * acc;
    }

    // term 2: (lambda_c^2 / 2) (g^{mn} D_m T_{nr} + xi R phi_r)
    const Ten3 gamma = christoffel(metric, x).gamma;
    CVec4 lap{};
    for (int m = 0; m < 4; ++m) {
        ChartPoint xp = x, xm = x;
        xp[m] += h[m];
        xm[m] -= h[m];
        const auto tp = cov_t(xp);
        const auto tm = cov_t(xm);
        for (int n = 0; n < 4; ++n)
            for (int r = 0; r < 4; ++r) {
                cplx d = (tp[n][r] - tm[n][r]) / (2.0 * h[m]);
                for (int l = 0; l < 4; ++l) {
                    d -= gamma[l][m][n] * t0[l][r];
                    d -= gamma[l][m][r] * t0[n][l];
                }
                lap[r] += ginv[m][n] * d;
            }
    }
    const double ricci_scalar = riemann(metric, x).scalar;
    const double c2 = 0.5 * params.lambda_c * params.lambda_c;
    for (int r = 0; r < 4; ++r) result[r] += c2 * (lap[r] + params.xi * ricci_scalar * p0[r]);
    return result;
}

}  // namespace fsp
