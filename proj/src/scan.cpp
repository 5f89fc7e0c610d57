#include "nopo/scan.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include <omp.h>

#include "nopo/errors.hpp"

namespace nopo {

const char* to_string(ScanAxis a)
{
    switch (a) {
    case ScanAxis::FbarOverFth: return "fbar_over_fth";
    case ScanAxis::F1OverFbar: return "f1_over_fbar";
    case ScanAxis::DeltaOverGamma: return "delta_over_gamma";
    case ScanAxis::EpsLT1: return "epsL_T1";
    }
    return "?";
}

ScanAxis scan_axis_from_string(const std::string& s)
{
    for (ScanAxis a : {ScanAxis::FbarOverFth, ScanAxis::F1OverFbar, ScanAxis::DeltaOverGamma, ScanAxis::EpsLT1}) {
        if (s == to_string(a)) return a;
    }
    throw ValidationError("axis: unknown scan axis '" + s +
                          "' (expected fbar_over_fth, f1_over_fbar, delta_over_gamma or epsL_T1)");
}

PumpProfile ScanFamily::build(const DerivedConstants& dc, ScanAxis axis, double value, double series) const
{
    if (pulsed) {
        const double period = T1 + T2;
        double fL = 0.0;
        switch (axis) {
        case ScanAxis::FbarOverFth: fL = value * dc.f_th * period / T1; break;
        case ScanAxis::EpsLT1: fL = value / T1 * dc.f_th / dc.gamma; break;
        default: throw ValidationError(std::string("axis: ") + to_string(axis) + " does not apply to a pulse train");
        }
        return PumpProfile::pulse_train(fL, T1, T2);
    }
    double fbar = fbar_over_fth;
    double ratio = series;
    double delta = delta_over_gamma;
    switch (axis) {
    case ScanAxis::FbarOverFth: fbar = value; break;
    case ScanAxis::F1OverFbar: ratio = value; break;
    case ScanAxis::DeltaOverGamma: delta = value; break;
    case ScanAxis::EpsLT1: throw ValidationError("axis: epsL_T1 requires a pulse-train profile");
    }
    const double f0 = fbar * dc.f_th;
    return PumpProfile::harmonic(f0, ratio * f0, delta * dc.gamma);
}

Validity validity_check(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                        double factor)
{
    const double distance = std::abs(profile.mean() / dc.f_th - 1.0);
    if (distance == 0.0) return {false, 0.0};
    // Logs: the harmonic exponent can reach thousands.
    double log_rhs = std::log(dc.lambda_over_gamma);
    if (const auto* h = profile.as_harmonic()) log_rhs += 2.0 * (h->f1 / dc.f_th) * (params.gamma / h->delta);
    const double margin = std::exp(std::log(distance) - log_rhs);
    return {margin >= factor, margin};
}

ScanRow scan_point(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                   const ScanOptions& opts)
{
    const Regime regime = regime_classify(profile, dc);
    if (regime == Regime::Critical) throw SolverError("no nontrivial branch: pump is at threshold", 0.0);

    const SemiclassicalTrace n0 = meanfield_ode(params, dc, profile, opts.meanfield);
    if (regime == Regime::Above && !n0.converged) {
        throw SolverError("semiclassical trace did not converge", n0.periodicity_residual);
    }
    const VarianceTrace vt = variance_ode(params, dc, profile, n0, opts.variance);
    if (!vt.converged) throw SolverError("variance trace did not converge", vt.periodicity_residual);

    ScanRow row;
    row.V_min = vt.V_min;
    row.t_m = vt.t_m;
    row.n_min = regime == Regime::Above ? photon_number_quadrature(params, dc, profile, vt.t_m, opts.quadrature) : 0.0;
    row.epr = classify(vt.V_min) == Entanglement::EPR;
    const Validity v = validity_check(params, dc, profile, opts.validity_factor);
    row.valid = v.valid;
    row.margin = v.margin;
    return row;
}

namespace {

struct Job {
    double value;
    double series;
};

std::vector<Job> make_jobs(const ScanFamily& family, ScanAxis axis, const std::vector<double>& grid,
                           const std::vector<double>& series)
{
    if (grid.empty()) throw ValidationError("values: scan grid is empty");
    // A mismatched axis fails every row the same way, so it is a config error.
    if (family.pulsed && (axis == ScanAxis::F1OverFbar || axis == ScanAxis::DeltaOverGamma)) {
        throw ValidationError(std::string("axis: ") + to_string(axis) + " does not apply to a pulse train");
    }
    if (!family.pulsed && axis == ScanAxis::EpsLT1) {
        throw ValidationError("axis: epsL_T1 requires a pulse-train profile");
    }
    for (double v : grid) {
        if (!std::isfinite(v)) throw ValidationError("values: scan grid contains a non-finite value");
    }
    // A series only makes sense for harmonic families not scanning f1/fbar.
    std::vector<double> curves = series;
    if (family.pulsed || axis == ScanAxis::F1OverFbar || curves.empty()) curves = {0.0};
    std::vector<Job> jobs;
    for (double s : curves) {
        for (double v : grid) jobs.push_back({v, axis == ScanAxis::F1OverFbar ? v : s});
    }
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
        return a.series != b.series ? a.series < b.series : a.value < b.value;
    });
    return jobs;
}

void check_critical_band(const SystemParams& params, const ScanFamily& family, ScanAxis axis,
                         const std::vector<Job>& jobs, const ScanOptions& opts)
{
    if (!opts.enforce_validity) return;
    const DerivedConstants dc = derive_constants(params);
    for (const Job& j : jobs) {
        if (regime_classify(family.build(dc, axis, j.value, j.series), dc) == Regime::Critical) {
            throw ValidationError("values: grid point " + std::to_string(j.value) + " lies in the critical band");
        }
    }
}

ScanRow run_job(const SystemParams& params, const DerivedConstants& dc, const ScanFamily& family, ScanAxis axis,
                const Job& job, const ScanOptions& opts)
{
    ScanRow row;
    try {
        row = scan_point(params, dc, family.build(dc, axis, job.value, job.series), opts);
    } catch (const std::exception& e) {
        row = ScanRow{};
        row.V_min = std::numeric_limits<double>::quiet_NaN();
        row.t_m = row.n_min = row.margin = row.V_min;
        row.error = e.what();
    }
    row.axis_value = job.value;
    row.series = job.series;
    return row;
}

}  // namespace

ScanResult scan_vmin(const SystemParams& params, const ScanFamily& family, ScanAxis axis,
                     const std::vector<double>& grid, const std::vector<double>& series, const ScanOptions& opts)
{
    const DerivedConstants dc = derive_constants(params);
    const std::vector<Job> jobs = make_jobs(family, axis, grid, series);
    check_critical_band(params, family, axis, jobs, opts);
    ScanResult result{axis, std::vector<ScanRow>(jobs.size())};
    const int workers = opts.workers > 0 ? opts.workers : omp_get_max_threads();
    const auto n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long i = 0; i < n; ++i) result.rows[i] = run_job(params, dc, family, axis, jobs[i], opts);
    return result;
}

ScanResult scan_vmin_serial(const SystemParams& params, const ScanFamily& family, ScanAxis axis,
                            const std::vector<double>& grid, const std::vector<double>& series,
                            const ScanOptions& opts)
{
    const DerivedConstants dc = derive_constants(params);
    const std::vector<Job> jobs = make_jobs(family, axis, grid, series);
    check_critical_band(params, family, axis, jobs, opts);
    ScanResult result{axis, {}};
    for (const Job& j : jobs) result.rows.push_back(run_job(params, dc, family, axis, j, opts));
    return result;
}

FrequencySweep frequency_sweep(const SystemParams& params, const ScanFamily& family,
                               const std::vector<double>& delta_grid, const ScanOptions& opts)
{
    if (family.pulsed) throw ValidationError("profile: frequency sweep needs a harmonic family");
    if (delta_grid.empty()) throw ValidationError("values: scan grid is empty");
    const auto [lo, hi] = std::minmax_element(delta_grid.begin(), delta_grid.end());
    if (*lo > 1e-2 || *hi < 1e2) throw ValidationError("values: delta grid must span at least [1e-2, 1e2]");
    if (*lo <= 0.0) throw ValidationError("values: delta must be > 0");

    FrequencySweep sweep;
    sweep.result = scan_vmin(params, family, ScanAxis::DeltaOverGamma, delta_grid, {family.f1_over_fbar}, opts);
    const auto best = argmin_rows(sweep.result);
    if (best.empty()) throw SolverError("frequency sweep: every row failed", 0.0);
    sweep.delta_star = best.front().axis_value;
    sweep.V_star = best.front().V_min;
    return sweep;
}

std::vector<ScanRow> argmin_rows(const ScanResult& result)
{
    std::vector<ScanRow> out;
    for (const ScanRow& r : result.rows) {
        if (!r.ok()) continue;
        if (out.empty() || out.back().series != r.series) {
            out.push_back(r);
        } else if (r.V_min < out.back().V_min) {
            out.back() = r;
        }
    }
    return out;
}

}  // namespace nopo
