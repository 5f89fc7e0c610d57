#include "nopo/pump.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <numbers>
#include <string>

#include "nopo/errors.hpp"

namespace nopo {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& msg)
{
    if (!ok) throw ValidationError(msg);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

// Position of t inside its pulse period, in [0, T).
double pulse_phase(const PulseTrain& p, double t)
{
    const double T = p.T1 + p.T2;
    double s = t - std::floor(t / T) * T;
    if (s >= T) s -= T;
    if (s < 0.0) s = 0.0;
    return s;
}

// Splits x into a whole number of periods and the position inside the last one.
std::pair<double, double> pulse_split(const PulseTrain& p, double x)
{
    const double T = p.T1 + p.T2;
    const double n = std::floor(x / T);
    return {n, std::clamp(x - n * T, 0.0, p.T1)};
}

}  // namespace

DerivedConstants derive_constants(const SystemParams& params)
{
    require(positive(params.gamma), "gamma must be > 0");
    require(positive(params.gamma3), "gamma3 must be > 0");
    require(positive(params.k), "k must be > 0");
    DerivedConstants dc;
    dc.gamma = params.gamma;
    dc.lambda = params.k * params.k / params.gamma3;
    dc.f_th = params.gamma * params.gamma3 / params.k;
    dc.lambda_over_gamma = dc.lambda / params.gamma;
    return dc;
}

PumpProfile PumpProfile::constant(double f0)
{
    require(non_negative(f0), "f0 must be >= 0");
    return PumpProfile(ConstantPump{f0});
}

PumpProfile PumpProfile::harmonic(double f0, double f1, double delta)
{
    require(non_negative(f0), "f0 must be >= 0");
    require(non_negative(f1), "f1 must be >= 0");
    require(positive(delta), "delta must be > 0");
    return PumpProfile(HarmonicPump{f0, f1, delta});
}

PumpProfile PumpProfile::pulse_train(double fL, double T1, double T2)
{
    require(non_negative(fL), "fL must be >= 0");
    require(positive(T1), "T1 must be > 0");
    require(positive(T2), "T2 must be > 0");
    return PumpProfile(PulseTrain{fL, T1, T2});
}

double PumpProfile::period(double gamma) const
{
    return std::visit(overloaded{
                          [&](const ConstantPump&) { return 1.0 / gamma; },
                          [](const HarmonicPump& h) { return 2.0 * std::numbers::pi / h.delta; },
                          [](const PulseTrain& p) { return p.T1 + p.T2; },
                      },
                      v_);
}

double PumpProfile::amplitude(double t) const
{
    return std::visit(overloaded{
                          [](const ConstantPump& c) { return c.f0; },
                          [&](const HarmonicPump& h) { return h.f0 + h.f1 * std::cos(h.delta * t); },
                          [&](const PulseTrain& p) { return pulse_phase(p, t) < p.T1 ? p.fL : 0.0; },
                      },
                      v_);
}

double PumpProfile::mean() const
{
    return std::visit(overloaded{
                          [](const ConstantPump& c) { return c.f0; },
                          [](const HarmonicPump& h) { return h.f0; },
                          [](const PulseTrain& p) { return p.fL * p.T1 / (p.T1 + p.T2); },
                      },
                      v_);
}

double PumpProfile::integral(double a, double b) const
{
    return std::visit(overloaded{
                          [&](const ConstantPump& c) { return c.f0 * (b - a); },
                          [&](const HarmonicPump& h) {
                              // sin(db) - sin(da) written as a product to keep short
                              // intervals accurate.
                              const double half = 0.5 * h.delta * (b - a);
                              const double mid = 0.5 * h.delta * (a + b);
                              return h.f0 * (b - a) + 2.0 * h.f1 / h.delta * std::cos(mid) * std::sin(half);
                          },
                          [&](const PulseTrain& p) {
                              // Whole periods are counted as integers so that the
                              // result carries no cancellation from |a|, |b| >> T.
                              const auto [na, sa] = pulse_split(p, a);
                              const auto [nb, sb] = pulse_split(p, b);
                              return p.fL * ((nb - na) * p.T1 + (sb - sa));
                          },
                      },
                      v_);
}

std::vector<double> PumpProfile::discontinuities(double a, double b) const
{
    std::vector<double> out;
    const auto* p = as_pulse_train();
    if (!p || !(b > a)) return out;
    const double T = p->T1 + p->T2;
    for (double n = std::floor(a / T); n * T < b; n += 1.0) {
        for (double edge : {n * T, n * T + p->T1}) {
            if (edge > a && edge < b) out.push_back(edge);
        }
    }
    return out;
}

bool PumpProfile::piecewise_constant() const { return !std::holds_alternative<HarmonicPump>(v_); }

Regime regime_classify(const PumpProfile& profile, const DerivedConstants& dc, double eta)
{
    const double ratio = profile.mean() / dc.f_th;
    if (ratio < 1.0 - eta) return Regime::Below;
    if (ratio > 1.0 + eta) return Regime::Above;
    return Regime::Critical;
}

const char* to_string(Regime r)
{
    switch (r) {
    case Regime::Below: return "below";
    case Regime::Critical: return "critical";
    case Regime::Above: return "above";
    }
    return "unknown";
}

}  // namespace nopo
