#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fsp/geometry.hpp"
#include "fsp/linalg.hpp"
#include "fsp/rng.hpp"

namespace fsp {

// D is the diffusion coefficient of the non-differentiable regime; lambda_c,
// lambda, xi, mu enter the covariant scale operators. All independent.
struct QuantumParams {
    double diffusion = 0.5;  // D > 0
    double lambda_c = 1.0;
    double lambda = 1.0;
    double xi = 0.0;
    double mu = 0.0;
};

// ---------------------------------------------------------------------------
// Sampled paths and one-sided derivatives

struct SampledPath {
    std::vector<double> times;   // strictly increasing, >= 3 samples
    std::vector<double> values;
};

// One-sided difference quotients at the grid resolution. t must be a grid
// point; BoundaryError at the relevant end.
double forward_derivative(const SampledPath& path, double t);
double backward_derivative(const SampledPath& path, double t);

// Wiener path with increments sqrt(2 D dt) eta; W(0) = 0.
SampledPath brownian_path(std::uint64_t seed, std::size_t n_steps, double dt, double diffusion);

// Subsample every k-th point (for resolution-scaling measurements).
SampledPath subsample(const SampledPath& path, std::size_t k);

// ---------------------------------------------------------------------------
// Complex velocity

using RealVectorField = std::function<Vec3(const Vec3&, double)>;
using ComplexVectorFn = std::function<CVec3(const Vec3&, double)>;

// V = (v+ + v-)/2 - i (v+ - v-)/2. When built from a (v+, v-) pair the two
// input fields are kept, so decompose/recombine round-trips exactly.
struct ComplexVelocityField {
    ComplexVectorFn value;
    RealVectorField classical;  // (v+ + v-)/2
    RealVectorField nondiff;    // (v+ - v-)/2
    RealVectorField vplus;      // stored when available
    RealVectorField vminus;
};

ComplexVelocityField complex_velocity(RealVectorField v_plus, RealVectorField v_minus);

// ---------------------------------------------------------------------------
// Wavefunctions

// Analytic evaluator plus optional exact derivative callbacks. When a
// callback is missing the operation falls back to central differences with
// fd_step / fd_dt. amplitude_floor is the |psi| floor for logarithmic
// derivatives (AmplitudeFloor below it).
struct Wavefunction {
    std::function<cplx(const Vec3&, double)> value;
    std::function<CVec3(const Vec3&, double)> gradient;
    std::function<cplx(const Vec3&, double)> laplacian;
    std::function<cplx(const Vec3&, double)> time_derivative;
    std::function<CVec3(const Vec3&, double)> grad_log;       // grad ln psi
    std::function<cplx(const Vec3&, double)> laplacian_log;   // lap ln psi
    double amplitude_floor = 1e-10;
    double fd_step = 1e-4;
    double fd_dt = 1e-4;
};

// psi = A exp(i(k.x - omega t)), all derivatives exact.
Wavefunction plane_wave(const Vec3& k, double omega, double amplitude = 1.0);

// Harmonic-oscillator ground-state shape A exp(-|x|^2 / 4 sigma^2),
// stationary; |psi|^2 is the normal law with per-axis variance sigma^2.
Wavefunction gaussian_ground_state(double sigma, double amplitude = 1.0);

// 1d first excited state x exp(-x^2 / 4 sigma^2): has a node at x = 0.
Wavefunction excited_state_1d(double sigma);

// Complex samples on a uniform grid at one time stamp (up to 3 axes; unused
// dims = 1). Row-major flattened storage.
struct WavefunctionGrid {
    std::array<int, 3> dims{1, 1, 1};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::array<double, 3> origin{};
    double time = 0.0;
    std::vector<cplx> values;
    double amplitude_floor = 1e-10;

    std::size_t index(int i, int j, int k) const;
    cplx at(int i, int j, int k) const;
    Vec3 point(int i, int j, int k) const;
    std::size_t size() const { return values.size(); }
};

WavefunctionGrid sample_to_grid(const Wavefunction& psi, const std::array<int, 3>& dims,
                                const std::array<double, 3>& spacing,
                                const std::array<double, 3>& origin, double time);

// Grid file: '#'-comment header lines (dims / spacing / origin / time), then
// rows "index re im".
void write_wavefunction_grid(const std::string& path, const WavefunctionGrid& grid);
WavefunctionGrid read_wavefunction_grid(const std::string& path);

// ---------------------------------------------------------------------------
// Operators

// V = -2 i D grad ln psi. Real part 2 D grad S, imaginary part -2 D grad R
// for ln psi = R + i S.
CVec3 velocity_from_wavefunction(const Wavefunction& psi, const QuantumParams& params,
                                 const Vec3& x, double t);

ComplexVelocityField velocity_field(const Wavefunction& psi, const QuantumParams& params);

// Scalar field with optional exact derivatives for the scale derivative.
struct ScalarField {
    std::function<cplx(const Vec3&, double)> value;
    std::function<CVec3(const Vec3&, double)> gradient;
    std::function<cplx(const Vec3&, double)> time_derivative;
    std::function<cplx(const Vec3&, double)> laplacian;
    double fd_step = 1e-4;
    double fd_dt = 1e-4;
};

// df/dt + V . grad f, exactly this form. The extended flag adds -i D lap f
// for cross-checks; never the default.
cplx scale_derivative(const ScalarField& f, const ComplexVelocityField& v, const Vec3& x,
                      double t, bool extended = false, double diffusion = 0.0);

// dV/dt + (V . grad) V with V from velocity_from_wavefunction; one complex
// 3-vector per point.
CVec3 fractal_geodesic_residual(const Wavefunction& psi, const QuantumParams& params,
                                const Vec3& x, double t);

// D^2 lap psi + i D dpsi/dt - U psi with U = D^2 lap ln psi.
cplx schrodinger_residual(const Wavefunction& psi, const QuantumParams& params, const Vec3& x,
                          double t);

// Interior-node residual from three equal-grid time slices (central in t and
// x); boundary entries are zero.
WavefunctionGrid schrodinger_residual_grid(const WavefunctionGrid& prev,
                                           const WavefunctionGrid& cur,
                                           const WavefunctionGrid& next,
                                           const QuantumParams& params);

// Forward drift b+ = 2 D grad S + 2 D grad R (classical plus osmotic).
Vec3 nelson_drift(const Wavefunction& psi, const QuantumParams& params, const Vec3& x, double t);

// ---------------------------------------------------------------------------
// Walker ensembles

struct WalkerEnsemble {
    std::vector<Vec3> positions;
    double time = 0.0;
    QuantumParams params;
    std::uint64_t seed = 0;
    std::uint64_t step_count = 0;
    std::uint64_t rejected = 0;  // rejections are counted, walkers never dropped
};

WalkerEnsemble init_walkers_uniform(std::size_t n, double half_width, const QuantumParams& params,
                                    std::uint64_t seed);

// x <- x + b+(x, t) dt + sqrt(2 D dt) eta per axis. Walkers whose drift or
// destination hits the amplitude floor keep their position (counted).
void walker_step(WalkerEnsemble& ensemble, const Wavefunction& psi, double dt);

// Kolmogorov-Smirnov statistic of samples against a CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

double normal_cdf(double x, double sigma);

struct Histogram {
    std::vector<double> centers;
    std::vector<double> counts;
    std::vector<double> reference;  // expected counts under the reference density
};

Histogram walker_histogram(const WalkerEnsemble& ensemble, int axis, int bins, double lo,
                           double hi, const std::function<double(double)>& density);

// ---------------------------------------------------------------------------
// Chart-space operators (curved backgrounds)

using ChartScalarField = std::function<cplx(const ChartPoint&)>;
using ChartVectorField = std::function<CVec4(const ChartPoint&)>;

// D V~/Ds + V~^m D_m V~^a - i mu (D^m D_m + xi R) V~^a. The first term is the
// explicit s-dependence of the field and vanishes for static fields; pass
// ds_term to supply it. D_m is the metric covariant derivative by central
// differences plus connection terms.
CVec4 covariant_scale_derivative(const ChartVectorField& field, const MetricField& metric,
                                 const QuantumParams& params, const ChartPoint& x,
                                 double h_rel = 0.0, const ChartVectorField* ds_term = nullptr);

// lambda^2 D^m lnPsi D_m D_r lnPsi + (lambda_c^2/2)(D^m D_m D_r lnPsi
// + xi R D_r lnPsi), one complex covector per point. Logarithmic derivatives
// are computed from dPsi/Psi, so no branch cuts enter.
CVec4 klein_gordon_residual(const ChartScalarField& psi, const MetricField& metric,
                            const QuantumParams& params, const ChartPoint& x, double h_rel = 0.0,
                            double amplitude_floor = 1e-12);

}  // namespace fsp
