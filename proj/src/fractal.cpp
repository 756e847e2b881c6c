#include "fsp/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace fsp {

namespace {

double draw(const FractalParams& params, double sd, RngStream& rng) {
    if (params.distribution == NoiseLaw::gaussian) return sd * rng.normal();
    // Uniform on [-sqrt(3) sd, sqrt(3) sd] has standard deviation sd.
    return sd * 1.7320508075688772 * (2.0 * rng.uniform() - 1.0);
}

}  // namespace

Mat4 fluctuating_metric(const Mat4& g, const FractalParams& params, const Vec4& dx,
                        RngStream& rng) {
    for (double d : dx)
        if (!(d > 0.0)) throw Error("fluctuating_metric: resolution dx must be positive");
    if (params.amplitude == 0.0) return g;

    Mat4 gamma{};
    for (int m = 0; m < 4; ++m)
        for (int n = m; n < 4; ++n) gamma[m][n] = gamma[n][m] = draw(params, params.amplitude, rng);

    Mat4 out = g;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
            out[m][n] += gamma[m][n] * std::sqrt((params.lambda_c / dx[m]) * (params.lambda_c / dx[n]));

    Mat4 inv;
    double det = 0.0;
    if (!invert4(out, inv, det) || std::abs(det) < 1e-14)
        throw AmplitudeError("fluctuating_metric: draw made the metric non-invertible", gamma);
    return out;
}

Ten3 sample_connection_fluctuation(const FractalParams& params, double ds, RngStream& rng) {
    if (!(ds > 0.0)) throw Error("sample_connection_fluctuation: ds must be positive");
    Ten3 chi{};
    if (params.amplitude == 0.0) return chi;
    const double sd = params.amplitude * std::sqrt(params.lambda_c / ds);
    for (int a = 0; a < 4; ++a)
        for (int m = 0; m < 4; ++m)
            for (int n = m; n < 4; ++n) chi[a][m][n] = chi[a][n][m] = draw(params, sd, rng);
    return chi;
}

Ten4 sample_curvature_fluctuation(const FractalParams& params, double ds, RngStream& rng) {
    if (!(ds > 0.0)) throw Error("sample_curvature_fluctuation: ds must be positive");
    Ten4 xi{};
    if (params.amplitude == 0.0) return xi;
    const double sd = params.amplitude * std::sqrt(params.lambda_c / ds);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = c + 1; d < 4; ++d) {
                    const double v = draw(params, sd, rng);
                    xi[a][b][c][d] = v;
                    xi[a][b][d][c] = -v;
                }
    return xi;
}

FluctuationSample draw_fluctuation_sample(const FractalParams& params, double ds,
                                          RngStream& rng) {
    FluctuationSample s;
    s.chi = sample_connection_fluctuation(params, ds, rng);
    s.xi = sample_curvature_fluctuation(params, ds, rng);
    if (params.amplitude != 0.0)
        for (int m = 0; m < 4; ++m)
            for (int n = m; n < 4; ++n)
                s.gamma_metric[m][n] = s.gamma_metric[n][m] = draw(params, params.amplitude, rng);
    return s;
}

Trajectory stochastic_geodesic(const MetricField& metric, const FractalParams& params,
                               const ParticleState& initial, double s_end, double ds,
                               RngStream& rng) {
    if (ds <= 0.0) throw Error("stochastic_geodesic: ds must be positive");
    const double span = s_end - initial.s;
    if (span == 0.0) throw Error("stochastic_geodesic: empty interval");
    const long long n = std::max(1ll, std::llround(std::abs(span) / ds));
    const double h = span / static_cast<double>(n);

    auto rhs = [&metric](const ParticleState& st) { return geodesic_rhs(metric, st); };

    Trajectory traj;
    traj.samples.reserve(static_cast<std::size_t>(n) + 1);
    ParticleState state = initial;
    traj.samples.push_back(trajectory_sample(metric, state));

    for (long long k = 0; k < n; ++k) {
        try {
            const Vec4 u_pre = state.u;
            ParticleState next = rk4_step(rhs, state, h);
            if (params.amplitude != 0.0) {
                RngStream sub = rng.substream(static_cast<std::uint32_t>(k));
                const Ten3 chi = sample_connection_fluctuation(params, std::abs(h), sub);
                for (int a = 0; a < 4; ++a) {
                    double kick = 0.0;
                    for (int m = 0; m < 4; ++m)
                        for (int nn = 0; nn < 4; ++nn) kick += chi[a][m][nn] * u_pre[m] * u_pre[nn];
                    next.u[a] -= kick * h;
                }
            }
            if (!all_finite(next.x.coords) || !all_finite(next.u))
                throw NonFiniteResult("stochastic_geodesic: non-finite state");
            traj.samples.push_back(trajectory_sample(metric, next));
            state = next;
        } catch (const DomainError& e) {
            traj.status = TrajectoryStatus::domain_error;
            traj.error = e.what();
            return traj;
        }
    }
    return traj;
}

PairedTrajectory stochastic_deviation(const MetricField& metric, const FractalParams& params,
                                      const ParticleState& base0, const DeviationState& dev0,
                                      double s_end, double ds, RngStream& rng) {
    if (ds <= 0.0) throw Error("stochastic_deviation: ds must be positive");
    const double span = s_end - base0.s;
    if (span == 0.0) throw Error("stochastic_deviation: empty interval");
    const long long n = std::max(1ll, std::llround(std::abs(span) / ds));
    const double h = span / static_cast<double>(n);

    PairedTrajectory traj;
    traj.samples.reserve(static_cast<std::size_t>(n) + 1);
    PairState st{base0, dev0};
    traj.samples.push_back(paired_sample(metric, st));

    for (long long k = 0; k < n; ++k) {
        try {
            const Vec4 u_pre = st.base.u;
            const Vec4 psi_pre = st.dev.psi;
            PairState next = deviation_rk4_step(metric, st, h);
            if (params.amplitude != 0.0) {
                RngStream sub_chi = rng.substream(static_cast<std::uint32_t>(2 * k));
                RngStream sub_xi = rng.substream(static_cast<std::uint32_t>(2 * k + 1));
                const Ten3 chi = sample_connection_fluctuation(params, std::abs(h), sub_chi);
                const Ten4 xi = sample_curvature_fluctuation(params, std::abs(h), sub_xi);
                for (int a = 0; a < 4; ++a) {
                    double kick_u = 0.0;
                    double kick_w = 0.0;
                    for (int m = 0; m < 4; ++m)
                        for (int nn = 0; nn < 4; ++nn) kick_u += chi[a][m][nn] * u_pre[m] * u_pre[nn];
                    for (int b = 0; b < 4; ++b)
                        for (int c = 0; c < 4; ++c)
                            for (int d = 0; d < 4; ++d)
                                kick_w += xi[a][b][c][d] * u_pre[b] * u_pre[c] * psi_pre[d];
                    next.base.u[a] -= kick_u * h;
                    next.dev.w[a] += kick_w * h;
                }
            }
            if (!all_finite(next.base.x.coords) || !all_finite(next.dev.psi) ||
                !all_finite(next.dev.w))
                throw NonFiniteResult("stochastic_deviation: non-finite state");
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

PathMatrix to_matrix(const Trajectory& traj, std::size_t stride) {
    PathMatrix m;
    const std::size_t n = traj.samples.size();
    for (std::size_t i = 0; i < n; i += stride) {
        const auto& s = traj.samples[i];
        m.s.push_back(s.s);
        m.rows.push_back({s.x[0], s.x[1], s.x[2], s.x[3], s.u[0], s.u[1], s.u[2], s.u[3]});
    }
    if (n > 0 && (n - 1) % stride != 0) {
        const auto& s = traj.samples.back();
        m.s.push_back(s.s);
        m.rows.push_back({s.x[0], s.x[1], s.x[2], s.x[3], s.u[0], s.u[1], s.u[2], s.u[3]});
    }
    return m;
}

PathMatrix to_matrix(const PairedTrajectory& traj, std::size_t stride) {
    PathMatrix m;
    const std::size_t n = traj.samples.size();
    for (std::size_t i = 0; i < n; i += stride) {
        const auto& s = traj.samples[i];
        m.s.push_back(s.s);
        m.rows.push_back(
            {s.psi[0], s.psi[1], s.psi[2], s.psi[3], s.w[0], s.w[1], s.w[2], s.w[3]});
    }
    if (n > 0 && (n - 1) % stride != 0) {
        const auto& s = traj.samples.back();
        m.s.push_back(s.s);
        m.rows.push_back(
            {s.psi[0], s.psi[1], s.psi[2], s.psi[3], s.w[0], s.w[1], s.w[2], s.w[3]});
    }
    return m;
}

LogLogFit fit_loglog(std::span<const ConvergencePoint> points) {
    if (points.size() < 2) throw Error("fit_loglog: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(points.size());
    for (const auto& p : points) {
        const double x = std::log10(static_cast<double>(p.n));
        const double y = std::log10(std::max(p.err, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    LogLogFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

EnsembleResult ensemble_statistics(const std::vector<PathMatrix>& paths,
                                   const PathMatrix* reference,
                                   std::span<const std::size_t> fit_sizes) {
    if (paths.size() < 2) throw Error("ensemble_statistics: need at least two trajectories");
    const std::size_t n_samples = paths.front().s.size();
    for (const auto& p : paths) {
        if (p.s.size() != n_samples || p.rows.size() != n_samples)
            throw GridMismatch("ensemble_statistics: trajectories not on a common grid");
        for (std::size_t i = 0; i < n_samples; ++i)
            if (std::abs(p.s[i] - paths.front().s[i]) > 1e-12 * std::max(1.0, std::abs(p.s[i])))
                throw GridMismatch("ensemble_statistics: s grids differ");
    }

    EnsembleResult out;
    out.n = paths.size();
    out.s = paths.front().s;
    out.mean.assign(n_samples, {});
    out.spread.assign(n_samples, 0.0);

    for (const auto& p : paths)
        for (std::size_t i = 0; i < n_samples; ++i)
            for (int c = 0; c < 8; ++c) out.mean[i][c] += p.rows[i][c];
    const double inv_n = 1.0 / static_cast<double>(out.n);
    for (std::size_t i = 0; i < n_samples; ++i)
        for (int c = 0; c < 8; ++c) out.mean[i][c] *= inv_n;

    for (const auto& p : paths)
        for (std::size_t i = 0; i < n_samples; ++i) {
            double d2 = 0.0;
            for (int c = 0; c < 8; ++c) {
                const double d = p.rows[i][c] - out.mean[i][c];
                d2 += d * d;
            }
            out.spread[i] += d2;
        }
    for (std::size_t i = 0; i < n_samples; ++i) out.spread[i] = std::sqrt(out.spread[i] * inv_n);

    if (reference != nullptr && !fit_sizes.empty()) {
        if (reference->s.size() != n_samples)
            throw GridMismatch("ensemble_statistics: reference grid differs");
        const std::size_t last = n_samples - 1;
        std::array<double, 8> prefix{};
        std::size_t taken = 0;
        std::size_t next_fit = 0;
        std::vector<std::size_t> sizes(fit_sizes.begin(), fit_sizes.end());
        std::sort(sizes.begin(), sizes.end());
        for (const auto& p : paths) {
            for (int c = 0; c < 8; ++c) prefix[c] += p.rows[last][c];
            ++taken;
            while (next_fit < sizes.size() && sizes[next_fit] == taken) {
                double e2 = 0.0;
                for (int c = 0; c < 8; ++c) {
                    const double d = prefix[c] / static_cast<double>(taken) - reference->rows[last][c];
                    e2 += d * d;
                }
                out.convergence.push_back({taken, std::sqrt(e2 / 8.0)});
                ++next_fit;
            }
        }
        if (out.convergence.size() >= 2) {
            out.fit = fit_loglog(out.convergence);
            out.has_fit = true;
        }
    }
    return out;
}

namespace {

template <typename RunFn>
void run_walkers(std::size_t n_paths, int threads, const RunFn& run) {
    if (threads <= 1) {
        for (std::size_t w = 0; w < n_paths; ++w) run(w);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::size_t chunk = (n_paths + static_cast<std::size_t>(threads) - 1) /
                        static_cast<std::size_t>(threads);
    for (int t = 0; t < threads; ++t) {
        const std::size_t lo = static_cast<std::size_t>(t) * chunk;
        const std::size_t hi = std::min(n_paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, t, &run, &errors] {
            try {
                for (std::size_t w = lo; w < hi; ++w) run(w);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

EnsembleResult stochastic_geodesic_ensemble(const MetricField& metric, const FractalParams& params,
                                            const ParticleState& initial, double s_end, double ds,
                                            std::size_t n_paths, const EnsembleOptions& opts) {
    auto rhs = [&metric](const ParticleState& st) { return geodesic_rhs(metric, st); };
    const PathMatrix reference = to_matrix(integrate(rhs, metric, initial, s_end, ds),
                                           opts.store_stride);

    std::vector<PathMatrix> paths(n_paths);
    run_walkers(n_paths, opts.threads, [&](std::size_t w) {
        RngStream stream(params.seed, static_cast<std::uint32_t>(w));
        paths[w] = to_matrix(stochastic_geodesic(metric, params, initial, s_end, ds, stream),
                             opts.store_stride);
    });

    std::vector<std::size_t> sizes;
    for (std::size_t s : opts.fit_sizes)
        if (s >= 1 && s <= n_paths) sizes.push_back(s);
    return ensemble_statistics(paths, &reference, sizes);
}

EnsembleResult stochastic_deviation_ensemble(const MetricField& metric,
                                             const FractalParams& params,
                                             const ParticleState& base0,
                                             const DeviationState& dev0, double s_end, double ds,
                                             std::size_t n_paths, const EnsembleOptions& opts) {
    const PathMatrix reference =
        to_matrix(integrate_deviation(metric, base0, dev0, s_end, ds), opts.store_stride);

    std::vector<PathMatrix> paths(n_paths);
    run_walkers(n_paths, opts.threads, [&](std::size_t w) {
        RngStream stream(params.seed, static_cast<std::uint32_t>(w));
        paths[w] =
            to_matrix(stochastic_deviation(metric, params, base0, dev0, s_end, ds, stream),
                      opts.store_stride);
    });

    std::vector<std::size_t> sizes;
    for (std::size_t s : opts.fit_sizes)
        if (s >= 1 && s <= n_paths) sizes.push_back(s);
    return ensemble_statistics(paths, &reference, sizes);
}

}  // namespace fsp
