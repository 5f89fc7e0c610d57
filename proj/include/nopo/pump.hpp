#pragma once

// Physical parameters of the two-mode parametric oscillator with the pump
// mode adiabatically eliminated, and the time-periodic pump amplitude f(t).
//
// Rates are in arbitrary but consistent units; the defaults use
// gamma = 1 so that time is measured in units of 1/gamma.

#include <variant>
#include <vector>

namespace nopo {

struct SystemParams {
    double gamma = 1.0;   // subharmonic mode decay rate
    double gamma3 = 25.0; // pump mode decay rate
    double k = 5e-4;      // down-conversion coupling

    /// Adiabatic elimination of the pump is trusted for gamma3/gamma >= 10.
    bool adiabatic_valid() const { return gamma3 / gamma >= 10.0; }
};

struct DerivedConstants {
    double lambda = 0.0;            // k^2 / gamma3
    double f_th = 0.0;              // gamma * gamma3 / k
    double lambda_over_gamma = 0.0; // small parameter of the linearized theory
    double gamma = 0.0;

    /// Linearized theory needs lambda/gamma << 1.
    bool linearization_valid() const { return lambda_over_gamma < 1e-2; }
};

/// Throws ValidationError unless gamma, gamma3, k are all finite and > 0.
DerivedConstants derive_constants(const SystemParams& params);

struct ConstantPump {
    double f0 = 0.0;
};

/// f(t) = f0 + f1 cos(delta t)
struct HarmonicPump {
    double f0 = 0.0;
    double f1 = 0.0;
    double delta = 1.0;
};

/// Rectangular pulses of height fL, on over [nT, nT + T1), off for T2.
struct PulseTrain {
    double fL = 0.0;
    double T1 = 0.01;
    double T2 = 1.0;
};

/// Periodic pump amplitude. Immutable once built; the factories validate.
class PumpProfile {
public:
    using Variant = std::variant<ConstantPump, HarmonicPump, PulseTrain>;

    static PumpProfile constant(double f0);
    static PumpProfile harmonic(double f0, double f1, double delta);
    static PumpProfile pulse_train(double fL, double T1, double T2);

    /// Constant pumps report a period of 1/gamma; `gamma` is only used there.
    double period(double gamma = 1.0) const;
    double amplitude(double t) const;
    double mean() const;
    /// Exact integral of f over [a, b].
    double integral(double a, double b) const;
    /// Points in the open interval (a, b) where f jumps.
    std::vector<double> discontinuities(double a, double b) const;
    bool piecewise_constant() const;

    const Variant& variant() const { return v_; }
    const HarmonicPump* as_harmonic() const { return std::get_if<HarmonicPump>(&v_); }
    const PulseTrain* as_pulse_train() const { return std::get_if<PulseTrain>(&v_); }
    const ConstantPump* as_constant() const { return std::get_if<ConstantPump>(&v_); }

private:
    explicit PumpProfile(Variant v) : v_(v) {}
    Variant v_;
};

inline double pump_amplitude(const PumpProfile& profile, double t) { return profile.amplitude(t); }
inline double pump_mean(const PumpProfile& profile) { return profile.mean(); }

/// epsilon(t) = f(t) k / gamma3, evaluated as gamma f / f_th so that f = f_th
/// maps to gamma without rounding.
inline double epsilon_of_t(const PumpProfile& profile, const DerivedConstants& dc, double t)
{
    return dc.gamma * (profile.amplitude(t) / dc.f_th);
}

/// Integral of epsilon over [a, b].
inline double epsilon_integral(const PumpProfile& profile, const DerivedConstants& dc, double a, double b)
{
    return dc.gamma * (profile.integral(a, b) / dc.f_th);
}

enum class Regime { Below, Critical, Above };

inline constexpr double kCriticalBand = 1e-6;

/// Below iff mean f < f_th (1 - eta), Above iff mean f > f_th (1 + eta).
Regime regime_classify(const PumpProfile& profile, const DerivedConstants& dc, double eta = kCriticalBand);

const char* to_string(Regime r);

}  // namespace nopo
