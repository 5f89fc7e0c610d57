#pragma once

// Shared stepping for the periodic-attractor ODE solvers. One period is cut
// into segments at the output grid and at every pump discontinuity; each
// segment is integrated with an adaptive Dormand-Prince 5(4) pair that lands
// exactly on the segment end. For piecewise-constant pumps epsilon is frozen
// at the segment midpoint, so the drift never sees the jump.

#include <algorithm>
#include <cstddef>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "nopo/pump.hpp"

namespace nopo::detail {

struct PeriodSchedule {
    std::vector<double> stops;   // sorted, first 0, last T
    std::vector<long> grid_index; // index into the uniform grid, -1 for pump edges
    std::size_t grid_size = 0;
    double period = 0.0;
};

inline PeriodSchedule make_schedule(const PumpProfile& profile, double period, std::size_t n)
{
    PeriodSchedule s;
    s.period = period;
    s.grid_size = n;
    std::vector<std::pair<double, long>> pts;
    for (std::size_t j = 0; j < n; ++j) pts.emplace_back(period * static_cast<double>(j) / static_cast<double>(n), static_cast<long>(j));
    for (double e : profile.discontinuities(0.0, period)) pts.emplace_back(e, -1);
    std::sort(pts.begin(), pts.end());
    for (const auto& [t, idx] : pts) {
        if (!s.stops.empty() && t <= s.stops.back()) {
            if (idx >= 0) s.grid_index.back() = idx;
            continue;
        }
        s.stops.push_back(t);
        s.grid_index.push_back(idx);
    }
    s.stops.push_back(period);
    s.grid_index.push_back(-1);
    return s;
}

struct StepTolerance {
    double atol = 1e-12;
    double rtol = 1e-10;
};

/// Advances `x` across one period. `deriv(x, dxdt, t, eps)` is the drift;
/// `observe(stop_index, x)` fires at every stop except the final t = T.
template <class State, class Deriv, class Observe>
void integrate_period(State& x, const PeriodSchedule& sched, const PumpProfile& profile,
                      const DerivedConstants& dc, const StepTolerance& tol, Deriv&& deriv, Observe&& observe)
{
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(tol.atol, tol.rtol);
    const bool frozen = profile.piecewise_constant();
    for (std::size_t i = 0; i + 1 < sched.stops.size(); ++i) {
        observe(i, x);
        const double a = sched.stops[i];
        const double b = sched.stops[i + 1];
        const double eps_mid = epsilon_of_t(profile, dc, 0.5 * (a + b));
        auto rhs = [&](const State& y, State& dydt, double t) {
            deriv(y, dydt, t, frozen ? eps_mid : epsilon_of_t(profile, dc, t));
        };
        odeint::integrate_adaptive(stepper, rhs, x, a, b, 0.25 * (b - a));
    }
}

}  // namespace nopo::detail
