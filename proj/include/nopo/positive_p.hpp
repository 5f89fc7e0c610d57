#pragma once

// Direct Ito simulation of the positive-P equations for the two subharmonic
// modes (pump adiabatically eliminated):
//
//   d alpha1 = [-(gamma + lambda alpha2 beta2) alpha1 + eps(t) beta2] dt + dW_alpha1
//   d beta1  = [-(gamma + lambda alpha2 beta2) beta1  + eps(t) alpha2] dt + dW_beta1
//
// and 1 <-> 2, with <dW_alpha1 dW_alpha2> = (eps - lambda alpha1 alpha2) dt,
// <dW_beta1 dW_beta2> = (eps - lambda beta1 beta2) dt, all other pairs zero.
// Moments are taken in the frame where the pump and coupling phases are
// absorbed, so the minimal-variance quadrature angle is theta = 0.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nopo/pump.hpp"

namespace nopo {

using cplx = std::complex<double>;

struct TrajectoryState {
    cplx alpha1, beta1, alpha2, beta2;
    double t = 0.0;
    bool escaped = false;
};

/// Coefficients c1, c2 with W1 = c1 (xi1 + i xi2), W2 = c2 (xi1 - i xi2):
/// <W1 W2> = d, <W1^2> = <W2^2> = 0 for d = eps - lambda * prod.
struct NoisePair {
    cplx c1, c2;
};
NoisePair noise_factorize(double eps, double lambda, cplx prod);

/// Four real unit normals per step: two for the alpha pair, two for the beta pair.
using NoiseDraws = std::array<double, 4>;

double escape_bound(const DerivedConstants& dc);

/// One Euler-Maruyama step of length dt with eps evaluated at state.t (Ito).
/// A non-finite result or an amplitude above escape_bound() returns the
/// incoming state frozen with escaped = true.
TrajectoryState sde_step(const TrajectoryState& state, const DerivedConstants& dc, const PumpProfile& profile,
                         double dt, const NoiseDraws& draws);

/// Mean and trajectory-level standard error of a complex moment.
struct Moment {
    cplx mean;
    double se_re = 0.0;
    double se_im = 0.0;
};

struct EnsembleStats {
    std::vector<double> t;
    std::vector<Moment> n1, n2;          // <alpha_i beta_i>
    std::vector<Moment> n_plus;          // <n1 + n2>
    std::vector<Moment> R;               // <(alpha1 - beta2)(beta1 - alpha2)>
    std::vector<Moment> cross_alpha;     // <alpha1 alpha2>
    std::vector<Moment> cross_beta;      // <beta1 beta2>
    std::vector<Moment> Z;               // <(n1 - n2)^2 + n1 + n2>
    std::vector<Moment> n_plus_sq;       // <n_plus^2>
    std::vector<Moment> n_plus_R;        // <n_plus R>
    std::vector<double> V, se_V;         // 1 + Re<R>
    // Per-trajectory central-difference residuals of the exact moment
    // equations for <n_plus> and <R>; defined on interior points only
    // (first and last entries are zero with zero error).
    std::vector<Moment> residual_n_plus, residual_R;

    std::size_t n_trajectories = 0;
    std::size_t n_escaped = 0;
    std::uint64_t seed = 0;
    double dt = 0.0;
    double transient = 0.0;
    std::string rng;
    bool experimental = false;     // above-threshold run
    bool escape_warning = false;   // escaped fraction above 1%
};

struct EnsembleOptions {
    std::size_t n_trajectories = 10000;
    std::uint64_t seed = 42;
    double dt = 1e-3;              // requested; the effective step divides the sample spacing
    double transient = 8.0;        // discarded time, rounded up to whole pump periods
    std::size_t samples_per_period = 64;
    std::size_t periods = 1;
    int workers = 0;               // 0 = OpenMP default
    std::size_t block_size = 64;   // reduction granularity; fixed, so results ignore the worker count
};

/// Runs n independent trajectories from vacuum, OpenMP-parallel over fixed
/// blocks of trajectories with a block-ordered reduction. Output is bitwise
/// identical for any worker count. Throws SolverError when more than 10% of
/// trajectories escape.
EnsembleStats ensemble_run(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                           const EnsembleOptions& opts);

/// Straight trajectory-order reference of ensemble_run, single-threaded.
/// Agrees with ensemble_run to rounding (summation order differs).
EnsembleStats ensemble_run_serial(const SystemParams& params, const DerivedConstants& dc,
                                  const PumpProfile& profile, const EnsembleOptions& opts);

/// V(theta) = 1 + Re[<n_plus> - <alpha1 alpha2> e^{i theta} - <beta1 beta2> e^{-i theta}].
std::vector<double> variance_at_theta(const EnsembleStats& stats, double theta);

struct ResidualReport {
    std::vector<double> t;             // interior grid points
    std::vector<double> z_n_plus;      // residual / combined standard error
    std::vector<double> z_R;
    double fraction_within_n_plus = 1.0; // share of points with |z| <= 3
    double fraction_within_R = 1.0;
    bool passed = false;               // both fractions >= 0.95
};

/// Compares finite-difference d<n_plus>/dt and d<R>/dt with the right-hand
/// sides of the exact moment equations, both estimated from the same
/// trajectories. Needs >= 16 samples per pump period.
ResidualReport moment_residual_check(const SystemParams& params, const DerivedConstants& dc,
                                     const PumpProfile& profile, const EnsembleStats& stats);

}  // namespace nopo
