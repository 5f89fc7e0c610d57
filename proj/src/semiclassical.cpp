#include "nopo/semiclassical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "nopo/errors.hpp"
#include "periodic_ode.hpp"

namespace nopo {

namespace {

constexpr std::size_t kPeakSamples = 256;

// Exponent of the n0 integrand at lag tau <= 0:
//   2 * integral_{t}^{t+tau} (eps - gamma) = -2 * integral_{t+tau}^{t} eps - 2 gamma tau.
double lag_exponent(const PumpProfile& profile, const DerivedConstants& dc, double t, double tau)
{
    return -2.0 * epsilon_integral(profile, dc, t + tau, t) - 2.0 * dc.gamma * tau;
}

}  // namespace

bool SemiclassicalTrace::trivial() const
{
    return std::all_of(n0.begin(), n0.end(), [](double n) { return n == 0.0; });
}

std::vector<double> period_grid(double period, std::size_t n)
{
    std::vector<double> t(n);
    for (std::size_t j = 0; j < n; ++j) t[j] = period * static_cast<double>(j) / static_cast<double>(n);
    return t;
}

double log_pair_rate(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                     double t, const QuadratureOptions& opts)
{
    if (regime_classify(profile, dc) != Regime::Above) {
        throw SolverError("no nontrivial branch: pump is not above threshold", 0.0);
    }
    const double T = profile.period(params.gamma);
    const double growth = dc.gamma * (profile.mean() / dc.f_th) - dc.gamma;

    // The lag integral over (-inf, 0] is a geometric series of identical
    // periods, each damped by exp(-2 T growth) relative to the previous one.
    std::vector<double> breaks = profile.discontinuities(t - T, t);
    for (double& b : breaks) b -= t;

    double peak = 0.0;
    for (std::size_t i = 0; i <= kPeakSamples; ++i) {
        const double tau = -T * static_cast<double>(i) / static_cast<double>(kPeakSamples);
        peak = std::max(peak, lag_exponent(profile, dc, t, tau));
    }
    for (double b : breaks) peak = std::max(peak, lag_exponent(profile, dc, t, b));

    const auto one_period = integrate(
        [&](double tau) { return std::exp(lag_exponent(profile, dc, t, tau) - peak); }, -T, 0.0, breaks, opts);
    const double log_integral = peak + std::log(one_period.value) - std::log(-std::expm1(-2.0 * T * growth));
    return -std::numbers::ln2 - log_integral;
}

double photon_number_quadrature(const SystemParams& params, const DerivedConstants& dc,
                                const PumpProfile& profile, double t, const QuadratureOptions& opts)
{
    if (regime_classify(profile, dc) == Regime::Below) return 0.0;
    return std::exp(log_pair_rate(params, dc, profile, t, opts) - std::log(dc.lambda));
}

double photon_number_harmonic(const SystemParams&, const DerivedConstants& dc, const PumpProfile& profile,
                              double t, double truncation, const QuadratureOptions& opts)
{
    const auto* h = profile.as_harmonic();
    if (!h) throw ValidationError("photon_number_harmonic needs a harmonic pump");
    const double ratio = h->f0 / dc.f_th;
    if (!(ratio > 1.0 + kCriticalBand)) {
        if (ratio < 1.0 - kCriticalBand) return 0.0;
        throw SolverError("no nontrivial branch: pump is at threshold", 0.0);
    }
    const double g = dc.gamma;
    const double slope = 2.0 * g * (ratio - 1.0);
    const double swing = 2.0 * g * h->f1 / (h->delta * dc.f_th);
    const double s0 = std::sin(h->delta * t);
    auto exponent = [&](double tau) { return slope * tau + swing * (std::sin(h->delta * (t + tau)) - s0); };

    const double tau_min = -(-std::log(truncation) + 2.0 * swing) / slope;
    const double T = 2.0 * std::numbers::pi / h->delta;

    // The maximum of the exponent lies where the linear decay has not yet
    // eaten the largest possible sine swing.
    const double search = std::max(tau_min, -2.0 * swing / slope);
    const std::size_t n_search = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(-search / T * 64.0)), 64, 200000);
    double peak = 0.0;
    for (std::size_t i = 1; i <= n_search; ++i) {
        peak = std::max(peak, exponent(search * static_cast<double>(i) / static_cast<double>(n_search)));
    }

    const double chunk = std::max(T, -tau_min / 2000.0);
    double sum = 0.0;
    for (double hi = 0.0; hi > tau_min; hi -= chunk) {
        const double lo = std::max(hi - chunk, tau_min);
        sum += integrate([&](double tau) { return std::exp(exponent(tau) - peak); }, lo, hi, {}, opts).value;
    }
    return std::exp(-std::log(2.0 * dc.lambda) - peak - std::log(sum));
}

SemiclassicalTrace meanfield_ode(const SystemParams& params, const DerivedConstants& dc,
                                 const PumpProfile& profile, const MeanfieldOptions& opts)
{
    if (opts.grid < 2) throw ValidationError("grid must have at least 2 samples");
    SemiclassicalTrace trace;
    trace.period = profile.period(params.gamma);
    trace.t = period_grid(trace.period, opts.grid);
    trace.n0.assign(opts.grid, 0.0);
    trace.converged = true;

    if (regime_classify(profile, dc) != Regime::Above || opts.n_initial == 0.0) return trace;

    const double n_start =
        opts.n_initial > 0.0 ? opts.n_initial : std::max((profile.mean() - dc.f_th) / params.k, 1.0);

    // State is y = log(lambda n):  dy/dt = 2 (eps - gamma) - 2 exp(y).
    using State = std::array<double, 1>;
    State x{std::log(dc.lambda * n_start)};
    const auto sched = detail::make_schedule(profile, trace.period, opts.grid);
    const detail::StepTolerance tol{opts.atol, opts.rtol};
    auto deriv = [&](const State& y, State& dydt, double, double eps) {
        dydt[0] = 2.0 * (eps - dc.gamma) - 2.0 * std::exp(y[0]);
    };

    std::vector<double> prev(opts.grid, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> cur(opts.grid);
    double deviation = std::numeric_limits<double>::infinity();
    for (std::size_t p = 1; p <= opts.max_periods; ++p) {
        detail::integrate_period(x, sched, profile, dc, tol, deriv, [&](std::size_t i, const State& y) {
            if (sched.grid_index[i] >= 0) cur[static_cast<std::size_t>(sched.grid_index[i])] = y[0];
        });
        if (!std::isfinite(x[0])) throw SolverError("mean-field ODE diverged", deviation);
        if (p > 1) {
            deviation = 0.0;
            for (std::size_t j = 0; j < opts.grid; ++j) deviation = std::max(deviation, std::abs(cur[j] - prev[j]));
        }
        std::swap(prev, cur);
        if (deviation < opts.period_tol) {
            trace.periods = p;
            double residual = 0.0;
            for (std::size_t j = 0; j < opts.grid; ++j) {
                trace.n0[j] = std::exp(prev[j]) / dc.lambda;
                residual = std::max(residual, std::abs(trace.n0[j] - std::exp(cur[j]) / dc.lambda));
            }
            trace.periodicity_residual = residual;
            return trace;
        }
    }
    throw SolverError("mean-field ODE did not reach a periodic state", deviation);
}

}  // namespace nopo
