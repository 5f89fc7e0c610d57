#pragma once

// Periodic mean photon number n0(t) of each subharmonic mode on the
// over-transient attractor.
//
// Internally everything is expressed through the pair rate m(t) = lambda n0(t),
// which is O(gamma) while n0 itself is O(gamma/lambda) ~ 1e8. Far below the
// instantaneous threshold m can be astronomically small, so the quadrature
// routes work with log m and the ODE route integrates log m directly.

#include <cstddef>
#include <vector>

#include "nopo/pump.hpp"
#include "nopo/quadrature.hpp"

namespace nopo {

struct SemiclassicalTrace {
    std::vector<double> t;   // uniform samples j T / N, j = 0..N-1
    std::vector<double> n0;  // intracavity photon number per mode
    double period = 0.0;
    bool converged = false;
    double periodicity_residual = 0.0;  // max |n0(t+T) - n0(t)| over the grid
    std::size_t periods = 0;            // periods integrated before convergence

    bool trivial() const;  // identically zero (below threshold)
};

/// log(lambda n0(t)) from the improper integral representation of n0,
/// folded onto a single period. Requires Regime::Above.
double log_pair_rate(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                     double t, const QuadratureOptions& opts = {});

/// n0(t) by quadrature. Below threshold returns 0; inside the critical band
/// throws SolverError ("no nontrivial branch").
double photon_number_quadrature(const SystemParams& params, const DerivedConstants& dc,
                                const PumpProfile& profile, double t, const QuadratureOptions& opts = {});

/// n0(t) for a harmonic pump from the explicit sin-difference integrand,
/// truncated where the exponential envelope drops below `truncation` of its
/// peak. Independent of log_pair_rate; used to cross-check it.
double photon_number_harmonic(const SystemParams& params, const DerivedConstants& dc,
                              const PumpProfile& profile, double t, double truncation = 1e-12,
                              const QuadratureOptions& opts = {});

struct MeanfieldOptions {
    std::size_t grid = 512;
    double rtol = 1e-10;
    double atol = 1e-12;
    double period_tol = 1e-8;  // relative period-to-period deviation
    std::size_t max_periods = 20000;
    double n_initial = -1.0;   // < 0 selects max((fbar - f_th)/k, 1)
};

/// Integrates the noiseless phase-locked equation
///   dn/dt = 2 (eps(t) - gamma) n - 2 lambda n^2
/// period by period until the sampled trace repeats. Below threshold (or
/// from n(0) = 0) the attractor is n = 0 and the trace is zero.
SemiclassicalTrace meanfield_ode(const SystemParams& params, const DerivedConstants& dc,
                                 const PumpProfile& profile, const MeanfieldOptions& opts = {});

/// Uniform sample times j T / N over one period.
std::vector<double> period_grid(double period, std::size_t n);

}  // namespace nopo
