#pragma once

// Linearized two-mode quadrature variance V(t) = V(X1 - X2) = V(Y1 + Y2) at
// the optimal quadrature angle. Vacuum level is 1.
//
// The memory term of the variance equation, u(t) = integral e^{4 gamma (tau - t)}
// n0(tau) dtau, is carried as an extra ODE state  du/dt = n0 - 4 gamma u.

#include <cstddef>
#include <string>
#include <vector>

#include "nopo/pump.hpp"
#include "nopo/quadrature.hpp"
#include "nopo/semiclassical.hpp"

namespace nopo {

enum class Entanglement { None, Inseparable, EPR };

const char* to_string(Entanglement e);

/// EPR iff V^2 < 1/4, inseparable iff V < 1. Throws ValidationError for V <= 0.
Entanglement classify(double V);

struct VarianceTrace {
    std::vector<double> t;  // uniform grid plus any pump edges, in [0, T)
    std::vector<double> V;
    std::vector<double> n0; // semiclassical photon number carried along
    std::vector<Entanglement> classification;
    double period = 0.0;
    double V_min = 0.0;
    double t_m = 0.0;       // in [0, T)
    bool converged = false;
    double periodicity_residual = 0.0;
    std::size_t periods = 0;
};

struct VarianceOptions {
    std::size_t grid = 512;
    double rtol = 1e-10;
    double atol = 1e-13;
    double period_tol = 1e-10;
    std::size_t max_periods = 20000;
};

/// Integrates dV/dt = -2 (gamma + eps + lambda n0) V + 2 lambda n0 + 2 gamma + 4 gamma lambda u
/// to its periodic state. `n0` seeds the semiclassical state; a trivial
/// (all-zero) trace selects the below-threshold equation with n0 = 0.
VarianceTrace variance_ode(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                           const SemiclassicalTrace& n0, const VarianceOptions& opts = {});

/// The periodic solution written as an integral over the past,
///   V(t) = 2 int_{-inf}^t exp(-2 int_tau^t (gamma + eps + lambda n0)) [gamma + lambda n0 + 2 gamma lambda u] dtau,
/// evaluated by quadrature with n0 from log_pair_rate. Below threshold or in
/// the critical band n0 = 0.
double variance_closedform(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                           double t, const QuadratureOptions& opts = {});

struct PulsedMinimum {
    double V_min = 1.0;
    double eps_L_T1 = 0.0;
    bool short_pulse = true; // false when T1/T2 > 0.1 and the formula is unreliable
};

/// Minimum variance of a short-pulse train near or below threshold:
///   e^{-2 eL T1} (1 - e^{-2 gamma T2}) / (1 - e^{-2 gamma T2 - 2 eL T1}).
PulsedMinimum vmin_pulsed(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile);

/// Output-field flux: intracavity variance or photon number times 2 gamma.
struct OutputFlux {
    double value = 0.0;
    static constexpr const char* unit = "s^-1";
};

inline OutputFlux to_output(double intracavity, double gamma) { return {2.0 * gamma * intracavity}; }

}  // namespace nopo
