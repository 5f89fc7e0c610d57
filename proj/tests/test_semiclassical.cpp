#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nopo/errors.hpp"
#include "nopo/semiclassical.hpp"

using namespace nopo;
using doctest::Approx;

namespace {

const SystemParams kParams{1.0, 25.0, 5e-4};

// Independent evaluation of the harmonic-pump photon number: composite
// Simpson rule on the explicit exponent over 40 modulation periods.
double simpson_n0(const DerivedConstants& dc, double fbar, double f1, double delta, double t)
{
    const double e0 = fbar / dc.f_th;
    const double e1 = f1 / dc.f_th;
    const double span = 40.0 * 2.0 * std::numbers::pi / delta;
    const int n = 400000;
    const double h = span / n;
    auto g = [&](double tau) {
        return std::exp(2.0 * ((e0 - dc.gamma) * tau + e1 / delta * (std::sin(delta * (t + tau)) - std::sin(delta * t))));
    };
    double sum = g(-span) + g(0.0);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * g(-span + i * h);
    return 1.0 / (2.0 * dc.lambda * sum * h / 3.0);
}

}  // namespace

TEST_CASE("constant pump above threshold: standard result")
{
    const auto dc = derive_constants(kParams);
    const auto p = PumpProfile::constant(3 * dc.f_th);
    CHECK(photon_number_quadrature(kParams, dc, p, 0.0) == Approx(2e8).epsilon(1e-9));
    CHECK(photon_number_quadrature(kParams, dc, p, 0.37) == Approx(2e8).epsilon(1e-9));

    MeanfieldOptions opts;
    opts.n_initial = 1.0;
    const auto trace = meanfield_ode(kParams, dc, p, opts);
    CHECK(trace.converged);
    for (double n : trace.n0) CHECK(n == Approx(2e8).epsilon(1e-8));
}

TEST_CASE("below threshold the trivial branch is returned")
{
    const auto dc = derive_constants(kParams);
    const auto p = PumpProfile::constant(0.8 * dc.f_th);
    CHECK(photon_number_quadrature(kParams, dc, p, 0.0) == 0.0);
    const auto trace = meanfield_ode(kParams, dc, p);
    CHECK(trace.trivial());
    CHECK(std::all_of(trace.n0.begin(), trace.n0.end(), [](double n) { return n == 0.0; }));
    CHECK_THROWS_AS(log_pair_rate(kParams, dc, p, 0.0), SolverError);
}

TEST_CASE("critical band has no nontrivial branch")
{
    const auto dc = derive_constants(kParams);
    CHECK_THROWS_AS(photon_number_quadrature(kParams, dc, PumpProfile::constant(dc.f_th), 0.0), SolverError);
}

TEST_CASE("zero initial photon number stays zero")
{
    const auto dc = derive_constants(kParams);
    MeanfieldOptions opts;
    opts.n_initial = 0.0;
    for (const auto& p : {PumpProfile::constant(3 * dc.f_th), PumpProfile::harmonic(3 * dc.f_th, 3.6 * dc.f_th, 2.0),
                          PumpProfile::pulse_train(200 * dc.f_th, 0.01, 1.0)}) {
        CHECK(meanfield_ode(kParams, dc, p, opts).trivial());
    }
}

TEST_CASE("harmonic pump at the reference parameters, t = 0")
{
    // Reference: 30-digit adaptive quadrature of the explicit exponent.
    const double frozen = 304157409.44275144;
    const auto dc = derive_constants(kParams);
    const double fbar = 3 * dc.f_th;
    const auto p = PumpProfile::harmonic(fbar, 0.4 * fbar, 2.0);
    const double oracle = simpson_n0(dc, fbar, 0.4 * fbar, 2.0, 0.0);
    CHECK(oracle == Approx(frozen).epsilon(1e-9));
    CHECK(photon_number_quadrature(kParams, dc, p, 0.0) == Approx(frozen).epsilon(1e-9));
    CHECK(photon_number_harmonic(kParams, dc, p, 0.0) == Approx(frozen).epsilon(1e-9));
    CHECK(photon_number_quadrature(kParams, dc, p, std::numbers::pi / 2) == Approx(115652468.89851544).epsilon(1e-9));
    CHECK(photon_number_quadrature(kParams, dc, p, 1.0) == Approx(198290887.66277814).epsilon(1e-9));
    CHECK(photon_number_quadrature(kParams, dc, PumpProfile::harmonic(fbar, 1.2 * fbar, 2.0), 0.0) ==
          Approx(522267297.56437).epsilon(1e-9));
}

TEST_CASE("harmonic route reduces to the standard result at f1 = 0")
{
    const auto dc = derive_constants(kParams);
    for (double r : {1.5, 2.0, 3.0, 5.0}) {
        const auto p = PumpProfile::harmonic(r * dc.f_th, 0.0, 2.0);
        CHECK(photon_number_harmonic(kParams, dc, p, 0.3) == Approx((r - 1) * dc.f_th / kParams.k).epsilon(1e-10));
    }
}

TEST_CASE("fast modulation averages out")
{
    const auto dc = derive_constants(kParams);
    const double fbar = 3 * dc.f_th;
    const double flat = (fbar - dc.f_th) / kParams.k;
    const auto p = PumpProfile::harmonic(fbar, 0.4 * fbar, 1e4);
    for (double t : {0.0, 1e-4, 3e-4}) CHECK(photon_number_harmonic(kParams, dc, p, t) == Approx(flat).epsilon(1e-3));
}

TEST_CASE("n0 oscillates with the modulation period")
{
    const auto dc = derive_constants(kParams);
    const double fbar = 3 * dc.f_th;
    const auto p = PumpProfile::harmonic(fbar, 0.4 * fbar, 2.0);
    CHECK(p.period() == Approx(std::numbers::pi));
    for (double t : {0.0, 0.4, 1.3, 2.9}) {
        CHECK(photon_number_harmonic(kParams, dc, p, t + std::numbers::pi) ==
              Approx(photon_number_harmonic(kParams, dc, p, t)).epsilon(1e-9));
    }
    const auto trace = meanfield_ode(kParams, dc, p);
    const auto [lo, hi] = std::minmax_element(trace.n0.begin(), trace.n0.end());
    CHECK(*hi > 2.0 * *lo);
}

TEST_CASE("mean-field ODE matches the harmonic quadrature at the reference parameters")
{
    const auto dc = derive_constants(kParams);
    const double fbar = 3 * dc.f_th;
    for (double r : {0.4, 1.2}) {
        const auto p = PumpProfile::harmonic(fbar, r * fbar, 2.0);
        const auto trace = meanfield_ode(kParams, dc, p);
        REQUIRE(trace.converged);
        for (std::size_t i = 0; i < trace.t.size(); i += 16) {
            CHECK(trace.n0[i] == Approx(photon_number_harmonic(kParams, dc, p, trace.t[i])).epsilon(1e-6));
        }
    }
}

TEST_CASE("property: mean-field ODE agrees with quadrature on random parameter sets")
{
    const auto dc = derive_constants(kParams);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ratio(1.1, 5.0), mod(0.0, 2.0), freq(0.1, 10.0);
    for (int set = 0; set < 20; ++set) {
        const double fbar = ratio(rng) * dc.f_th;
        const double f1 = mod(rng) * fbar;
        const double delta = freq(rng);
        CAPTURE(fbar / dc.f_th);
        CAPTURE(f1 / fbar);
        CAPTURE(delta);
        const auto p = PumpProfile::harmonic(fbar, f1, delta);
        const auto trace = meanfield_ode(kParams, dc, p);
        REQUIRE(trace.converged);
        const double peak = *std::max_element(trace.n0.begin(), trace.n0.end());
        CHECK(trace.periodicity_residual / peak < 1e-8);
        for (std::size_t i = 0; i < trace.t.size(); i += 32) {
            CHECK(trace.n0[i] == Approx(photon_number_quadrature(kParams, dc, p, trace.t[i])).epsilon(1e-6));
        }
    }
}

TEST_CASE("pulsed pump: ODE matches quadrature")
{
    const auto dc = derive_constants(kParams);
    const auto p = PumpProfile::pulse_train(111.1 * dc.f_th, 0.01, 1.0);
    const auto trace = meanfield_ode(kParams, dc, p);
    REQUIRE(trace.converged);
    for (std::size_t i = 0; i < trace.t.size(); i += 37) {
        CHECK(trace.n0[i] == Approx(photon_number_quadrature(kParams, dc, p, trace.t[i])).epsilon(1e-6));
    }
}

TEST_CASE("property: n0 scales as 1/lambda at fixed eps/gamma")
{
    const SystemParams doubled{1.0, 50.0, 5e-4};
    const auto a = derive_constants(kParams);
    const auto b = derive_constants(doubled);
    for (double t : {0.0, 0.7, 2.1}) {
        const double na = photon_number_quadrature(kParams, a, PumpProfile::harmonic(2 * a.f_th, 1.5 * a.f_th, 2.0), t);
        const double nb = photon_number_quadrature(doubled, b, PumpProfile::harmonic(2 * b.f_th, 1.5 * b.f_th, 2.0), t);
        CHECK(nb == Approx(2.0 * na).epsilon(1e-9));
    }
}

TEST_CASE("property: n0 increases strictly with f0 at f1 = 0")
{
    const auto dc = derive_constants(kParams);
    double prev = 0.0;
    for (double r = 1.01; r < 6.0; r += 0.25) {
        const double n = photon_number_quadrature(kParams, dc, PumpProfile::constant(r * dc.f_th), 0.0);
        CHECK(n > prev);
        prev = n;
    }
}

TEST_CASE("period grid")
{
    const auto g = period_grid(2.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.5);
    CHECK(g[3] == 1.5);
}
