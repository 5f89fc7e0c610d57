#include "nopo/variance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "nopo/errors.hpp"
#include "periodic_ode.hpp"

namespace nopo {

namespace {

struct Vertex {
    double offset = 0.0;
    double value = 0.0;
    bool ok = false;
};

// Parabola through (d0, e0), (0, 0), (d2, e2) with d0 < 0 < d2.
Vertex parabola_vertex(double d0, double e0, double d2, double e2)
{
    const double a = (e0 / d0 - e2 / d2) / (d0 - d2);
    const double b = e0 / d0 - a * d0;
    if (!(a > 0.0)) return {};
    const double x = -b / (2.0 * a);
    if (x < d0 || x > d2) return {};
    return {x, -b * b / (4.0 * a), true};
}

void locate_minimum(VarianceTrace& vt, const std::vector<long>& grid_index)
{
    const std::size_t n = vt.V.size();
    const auto it = std::min_element(vt.V.begin(), vt.V.end());
    const std::size_t i = static_cast<std::size_t>(it - vt.V.begin());
    vt.V_min = *it;
    vt.t_m = vt.t[i];

    const std::size_t il = (i + n - 1) % n;
    const std::size_t ir = (i + 1) % n;
    // No refinement across a pump edge: V has a kink there.
    if (grid_index[i] < 0 || grid_index[il] < 0 || grid_index[ir] < 0) return;
    const double tl = vt.t[il] - (il > i ? vt.period : 0.0);
    const double tr = vt.t[ir] + (ir < i ? vt.period : 0.0);
    const Vertex v = parabola_vertex(tl - vt.t[i], vt.V[il] - vt.V[i], tr - vt.t[i], vt.V[ir] - vt.V[i]);
    if (!v.ok || v.value > 0.0) return;
    vt.V_min = vt.V[i] + v.value;
    vt.t_m = vt.t[i] + v.offset;
    if (vt.t_m < 0.0) vt.t_m += vt.period;
    if (vt.t_m >= vt.period) vt.t_m -= vt.period;
}

}  // namespace

const char* to_string(Entanglement e)
{
    switch (e) {
    case Entanglement::None: return "none";
    case Entanglement::Inseparable: return "inseparable";
    case Entanglement::EPR: return "EPR";
    }
    return "unknown";
}

Entanglement classify(double V)
{
    if (!(V > 0.0)) throw ValidationError("variance must be positive");
    if (V * V < 0.25) return Entanglement::EPR;
    if (V < 1.0) return Entanglement::Inseparable;
    return Entanglement::None;
}

VarianceTrace variance_ode(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                           const SemiclassicalTrace& n0, const VarianceOptions& opts)
{
    if (opts.grid < 3) throw ValidationError("grid must have at least 3 samples");
    const double T = profile.period(params.gamma);
    const double g = dc.gamma;
    const bool above = !n0.n0.empty() && !n0.trivial();
    if (above && (n0.t.empty() || n0.t.front() != 0.0 || std::abs(n0.period - T) > 1e-12 * T)) {
        throw ValidationError("semiclassical trace must cover one pump period starting at t = 0");
    }

    // State: V, w = lambda u, y = log(lambda n0).
    using State = std::array<double, 3>;
    State x{1.0, 0.0, 0.0};
    if (above) {
        const std::size_t m = n0.n0.size();
        x[2] = std::log(dc.lambda * n0.n0.front());
        // w(0) from the sampled trace, folded over one period (trapezoid rule).
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double ta = n0.t[j] - T;
            const double tb = (j + 1 < m ? n0.t[j + 1] : T) - T;
            const double fa = std::exp(4.0 * g * ta) * n0.n0[j];
            const double fb = std::exp(4.0 * g * tb) * n0.n0[(j + 1) % m];
            acc += 0.5 * (fa + fb) * (tb - ta);
        }
        x[1] = dc.lambda * acc / -std::expm1(-4.0 * g * T);
    }

    auto deriv = [&](const State& s, State& ds, double, double eps) {
        const double m = above ? std::exp(s[2]) : 0.0;
        ds[0] = -2.0 * (g + eps + m) * s[0] + 2.0 * m + 2.0 * g + 4.0 * g * s[1];
        ds[1] = m - 4.0 * g * s[1];
        ds[2] = above ? 2.0 * (eps - g) - 2.0 * m : 0.0;
    };

    const auto sched = detail::make_schedule(profile, T, opts.grid);
    const std::size_t n_out = sched.stops.size() - 1;
    const detail::StepTolerance tol{opts.atol, opts.rtol};
    std::vector<State> prev(n_out), cur(n_out);
    double deviation = std::numeric_limits<double>::infinity();

    for (std::size_t p = 1; p <= opts.max_periods; ++p) {
        detail::integrate_period(x, sched, profile, dc, tol, deriv, [&](std::size_t i, const State& s) { cur[i] = s; });
        if (!std::isfinite(x[0]) || !std::isfinite(x[2])) throw SolverError("variance ODE diverged", deviation);
        if (p > 1) {
            deviation = 0.0;
            for (std::size_t i = 0; i < n_out; ++i) {
                deviation = std::max(deviation, std::abs(cur[i][0] - prev[i][0]));
                deviation = std::max(deviation, std::abs(cur[i][2] - prev[i][2]));
            }
        }
        std::swap(prev, cur);
        if (deviation < opts.period_tol) {
            VarianceTrace vt;
            vt.period = T;
            vt.converged = true;
            vt.periods = p;
            vt.t.assign(sched.stops.begin(), sched.stops.end() - 1);
            vt.V.resize(n_out);
            vt.n0.resize(n_out);
            vt.classification.resize(n_out);
            for (std::size_t i = 0; i < n_out; ++i) {
                vt.V[i] = prev[i][0];
                vt.n0[i] = above ? std::exp(prev[i][2]) / dc.lambda : 0.0;
                vt.classification[i] = classify(vt.V[i]);
                vt.periodicity_residual = std::max(vt.periodicity_residual, std::abs(prev[i][0] - cur[i][0]));
            }
            const std::vector<long> index(sched.grid_index.begin(), sched.grid_index.end() - 1);
            locate_minimum(vt, index);
            return vt;
        }
    }
    throw SolverError("variance ODE did not reach a periodic state", deviation);
}

double variance_closedform(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                           double t, const QuadratureOptions& opts)
{
    const double T = profile.period(params.gamma);
    const double g = dc.gamma;
    const double eps_mean = g * (profile.mean() / dc.f_th);
    const bool above = regime_classify(profile, dc) == Regime::Above;

    std::vector<double> breaks = profile.discontinuities(t - T, t);

    if (!above) {
        // Kernel exp(-2 int_tau^t (gamma + eps)), source gamma.
        const double decay = -std::expm1(-2.0 * (g + eps_mean) * T);
        const auto r = integrate(
            [&](double tau) { return std::exp(-2.0 * (g * (t - tau) + epsilon_integral(profile, dc, tau, t))); },
            t - T, t, breaks, opts);
        return 2.0 * g * r.value / decay;
    }

    // Above threshold lambda n0 = p / (2P) with p the linear growth factor and
    // P its running integral, so exp(-2 int lambda n0) = P(tau)/P(t) and the
    // kernel collapses to (m(t)/m(tau)) exp(-4 int_tau^t eps).
    auto log_m = [&](double s) { return log_pair_rate(params, dc, profile, s, opts); };
    auto memory = [&](double s) {
        const std::vector<double> inner = profile.discontinuities(s - T, s);
        const auto r = integrate([&](double q) { return std::exp(4.0 * g * (q - s) + log_m(q)); }, s - T, s,
                                 inner, opts);
        return r.value / -std::expm1(-4.0 * g * T);
    };
    const double log_m_t = log_m(t);
    const double decay = -std::expm1(-4.0 * eps_mean * T);
    const auto r = integrate(
        [&](double tau) {
            const double lm = log_m(tau);
            const double source = g + std::exp(lm) + 2.0 * g * memory(tau);
            return std::exp(log_m_t - lm - 4.0 * epsilon_integral(profile, dc, tau, t)) * source;
        },
        t - T, t, breaks, opts);
    return 2.0 * r.value / decay;
}

PulsedMinimum vmin_pulsed(const SystemParams&, const DerivedConstants& dc, const PumpProfile& profile)
{
    const auto* p = profile.as_pulse_train();
    if (!p) throw ValidationError("vmin_pulsed needs a pulse-train pump");
    PulsedMinimum out;
    out.eps_L_T1 = dc.gamma * (p->fL / dc.f_th) * p->T1;
    out.short_pulse = p->T1 / p->T2 <= 0.1;
    const double gap = 2.0 * dc.gamma * p->T2;
    out.V_min = std::exp(-2.0 * out.eps_L_T1) * -std::expm1(-gap) / -std::expm1(-gap - 2.0 * out.eps_L_T1);
    return out;
}

}  // namespace nopo
