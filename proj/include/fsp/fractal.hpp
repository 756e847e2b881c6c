#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fsp/deviation.hpp"
#include "fsp/motion.hpp"
#include "fsp/rng.hpp"

namespace fsp {

enum class NoiseLaw { gaussian, uniform_symmetric };

// Resolution scale, dimensionless amplitude, and the master seed of the
// fluctuation model. Per-component draws are zero-mean with standard
// deviation A * sqrt(lambda_c / ds) at step ds.
struct FractalParams {
    double lambda_c = 1.0;
    double amplitude = 0.0;
    std::uint64_t seed = 0;
    NoiseLaw distribution = NoiseLaw::gaussian;
};

// One fluctuation draw: chi (connection, lower-index symmetric), xi
// (curvature, antisymmetric in the last pair), gamma (metric, symmetric).
struct FluctuationSample {
    Ten3 chi{};
    Ten4 xi{};
    Mat4 gamma_metric{};
};

// g~_{mn} = g_{mn} + gamma_{mn} sqrt((lambda_c/dx^m)(lambda_c/dx^n)) with
// gamma zero-mean, per-component standard deviation A, symmetric. Throws
// AmplitudeError (carrying the draw) when the result is not invertible.
Mat4 fluctuating_metric(const Mat4& g, const FractalParams& params, const Vec4& dx,
                        RngStream& rng);

// chi^a_{mn}: independent zero-mean draws with sd A*sqrt(lambda_c/ds) for the
// 40 components with m <= n, mirrored so the lower-index symmetry is exact.
Ten3 sample_connection_fluctuation(const FractalParams& params, double ds, RngStream& rng);

// Xi^a_{bcd}: independent draws for c < d, antisymmetrized exactly in the
// last pair (diagonal c == d is zero).
Ten4 sample_curvature_fluctuation(const FractalParams& params, double ds, RngStream& rng);

// One joint draw of all three fluctuation tensors at step ds. gamma_metric is
// the bare zero-mean symmetric draw (sd = amplitude), before any resolution
// scaling.
FluctuationSample draw_fluctuation_sample(const FractalParams& params, double ds,
                                          RngStream& rng);

// Geodesic with Gamma + chi: deterministic RK4 drift plus the per-step kick
// dU^a = -chi^a_{mn} U^m U^n ds with a fresh chi each step (Euler-Maruyama,
// kick evaluated at the pre-step velocity). With amplitude 0 the output is
// bitwise identical to integrate() at the same step. Draws come from
// rng.substream(step).
Trajectory stochastic_geodesic(const MetricField& metric, const FractalParams& params,
                               const ParticleState& initial, double s_end, double ds,
                               RngStream& rng);

// Deviation stepped with curvature R + Xi (kick dW^a = Xi^a_{bcd} U^b U^c
// Psi^d ds), base path with Gamma + chi. Substream tags 2k / 2k+1 per step k.
PairedTrajectory stochastic_deviation(const MetricField& metric, const FractalParams& params,
                                      const ParticleState& base0, const DeviationState& dev0,
                                      double s_end, double ds, RngStream& rng);

// Trajectory as a plain (s, components) matrix; 8 components per sample:
// x0..x3, U0..U3 for base trajectories, Psi0..3, W0..3 for deviations.
struct PathMatrix {
    std::vector<double> s;
    std::vector<std::array<double, 8>> rows;
};

PathMatrix to_matrix(const Trajectory& traj, std::size_t stride = 1);
PathMatrix to_matrix(const PairedTrajectory& traj, std::size_t stride = 1);

struct ConvergencePoint {
    std::size_t n = 0;
    double err = 0.0;
};

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Least squares on (log10 n, log10 err).
LogLogFit fit_loglog(std::span<const ConvergencePoint> points);

struct EnsembleResult {
    std::size_t n = 0;
    std::vector<double> s;
    std::vector<std::array<double, 8>> mean;
    std::vector<double> spread;  // per-sample RMS over walkers and components
    std::vector<ConvergencePoint> convergence;
    LogLogFit fit{};
    bool has_fit = false;
};

// Pointwise mean and RMS spread over a set of equal-grid paths; with a
// reference, also the endpoint-RMS error of prefix means at fit_sizes and its
// log-log fit. Reduction order is fixed by walker index.
EnsembleResult ensemble_statistics(const std::vector<PathMatrix>& paths,
                                   const PathMatrix* reference = nullptr,
                                   std::span<const std::size_t> fit_sizes = {});

struct EnsembleOptions {
    int threads = 1;
    std::size_t store_stride = 1;
    std::vector<std::size_t> fit_sizes = {100, 1000, 10000};
};

// Run n_paths independent walkers (walker w draws from stream (seed, w)) and
// reduce against the deterministic reference. Output is identical for any
// thread count.
EnsembleResult stochastic_geodesic_ensemble(const MetricField& metric,
                                            const FractalParams& params,
                                            const ParticleState& initial, double s_end, double ds,
                                            std::size_t n_paths, const EnsembleOptions& opts = {});

EnsembleResult stochastic_deviation_ensemble(const MetricField& metric,
                                             const FractalParams& params,
                                             const ParticleState& base0,
                                             const DeviationState& dev0, double s_end, double ds,
                                             std::size_t n_paths, const EnsembleOptions& opts = {});

}  // namespace fsp
