#pragma once

#include <functional>
#include <span>

namespace nopo {

struct QuadratureOptions {
    double rtol = 1e-10;      // requested relative accuracy
    double fail_rtol = 1e-8;  // estimated error above this is a SolverError
    unsigned max_depth = 14; // at most 2^max_depth panels
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Globally adaptive 7-15 Gauss-Kronrod over [a, b], restarted at every breakpoint so
/// that jump discontinuities never fall inside a panel. Breakpoints outside
/// (a, b) are ignored; they need not be sorted.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints = {}, const QuadratureOptions& opts = {});

}  // namespace nopo
