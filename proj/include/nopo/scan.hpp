#pragma once

// Parameter scans of the periodic-state variance minimum and the
// linearization validity margin.

#include <cstddef>
#include <string>
#include <vector>

#include "nopo/pump.hpp"
#include "nopo/semiclassical.hpp"
#include "nopo/variance.hpp"

namespace nopo {

enum class ScanAxis { FbarOverFth, F1OverFbar, DeltaOverGamma, EpsLT1 };

const char* to_string(ScanAxis a);
/// Accepts the names printed by to_string; throws ValidationError otherwise.
ScanAxis scan_axis_from_string(const std::string& s);

/// A one-parameter family of pumps. Amplitudes are in units of f_th and
/// rates in units of gamma; the scanned axis overrides the matching field.
struct ScanFamily {
    bool pulsed = false;
    double fbar_over_fth = 1.1;
    double f1_over_fbar = 0.0;   // harmonic only
    double delta_over_gamma = 2.0;
    double T1 = 0.01;            // pulsed only, in 1/gamma
    double T2 = 1.0;

    /// Profile at (axis = value), with f1/fbar = series for harmonic families.
    PumpProfile build(const DerivedConstants& dc, ScanAxis axis, double value, double series) const;
};

struct ScanRow {
    double axis_value = 0.0;
    double series = 0.0;     // f1/fbar of the curve (harmonic families)
    double V_min = 0.0;
    double t_m = 0.0;        // in [0, T)
    double n_min = 0.0;      // n0(t_m)
    bool epr = false;
    bool valid = false;
    double margin = 0.0;
    std::string error;       // empty unless the row failed

    bool ok() const { return error.empty(); }
};

struct ScanResult {
    ScanAxis axis = ScanAxis::FbarOverFth;
    std::vector<ScanRow> rows;  // sorted by (series, axis_value)
};

struct ScanOptions {
    MeanfieldOptions meanfield;
    VarianceOptions variance;
    QuadratureOptions quadrature;
    double validity_factor = 100.0;
    bool enforce_validity = false;  // reject grid points inside the critical band
    int workers = 0;                // 0: OpenMP default
};

struct Validity {
    bool valid = false;
    double margin = 0.0;
};

/// margin = |fbar/f_th - 1| / RHS with RHS = (lambda/gamma) exp(2 (f1/f_th)(gamma/delta))
/// for harmonic pumps and lambda/gamma otherwise; valid iff margin >= factor.
Validity validity_check(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                        double factor = 100.0);

/// Single grid point: semiclassical trace, variance trace, minimum.
ScanRow scan_point(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                   const ScanOptions& opts = {});

/// One row per (series, axis value); rows run in parallel. Row failures are
/// recorded in ScanRow::error and do not stop the scan.
ScanResult scan_vmin(const SystemParams& params, const ScanFamily& family, ScanAxis axis,
                     const std::vector<double>& grid, const std::vector<double>& series = {0.0},
                     const ScanOptions& opts = {});

/// Row-by-row reference of scan_vmin.
ScanResult scan_vmin_serial(const SystemParams& params, const ScanFamily& family, ScanAxis axis,
                            const std::vector<double>& grid, const std::vector<double>& series = {0.0},
                            const ScanOptions& opts = {});

struct FrequencySweep {
    ScanResult result;
    double delta_star = 0.0;  // argmin of V_min over the grid, in units of gamma
    double V_star = 0.0;
};

/// V_min against delta/gamma at fixed fbar and f1. The grid must cover
/// [1e-2, 1e2].
FrequencySweep frequency_sweep(const SystemParams& params, const ScanFamily& family,
                               const std::vector<double>& delta_grid, const ScanOptions& opts = {});

/// Rows with the smallest V_min per series.
std::vector<ScanRow> argmin_rows(const ScanResult& result);

}  // namespace nopo
