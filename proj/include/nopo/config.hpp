#pragma once

// Run configuration: flat key=value text, overridable key by key, and
// serializable back to text and JSON so that outputs can embed it.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nopo/positive_p.hpp"
#include "nopo/pump.hpp"
#include "nopo/scan.hpp"

namespace nopo {

struct RunConfig {
    SystemParams params;

    std::string profile = "constant";  // constant | harmonic | pulse
    std::string units = "absolute";    // absolute | threshold (amplitudes in units of f_th)
    double f0 = 0.0;
    double f1 = 0.0;
    double delta = 2.0;
    double fL = 0.0;
    double T1 = 0.01;
    double T2 = 1.0;

    std::size_t grid = 512;
    double rtol = 1e-10;
    double period_tol = 1e-10;
    double quad_rtol = 1e-10;

    std::size_t n_traj = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 42;
    double transient = 8.0;
    std::size_t samples = 64;  // per period
    std::size_t periods = 1;
    int workers = 0;           // execution only; never serialized

    double gamma_si = 0.0;     // s^-1; 0 leaves outputs in units of gamma
    std::string out = "nopo";  // output path prefix

    std::string axis = "fbar_over_fth";
    std::string values;        // "a,b,c" or "lin:a:b:n" or "log:a:b:n"
    std::string series = "0"; // f1/fbar of each curve
    double validity_factor = 100.0;
    bool enforce_validity = false;
};

/// Every key accepted by set_field, in serialization order.
const std::vector<std::string>& config_keys();

/// Assigns one field from its text form. Throws ValidationError naming the
/// field on unknown keys or malformed values.
void set_field(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses key=value lines; '#' starts a comment. Later keys win.
void apply_text(RunConfig& cfg, const std::string& text);

/// Reads a key=value file, or a JSON document whose "config" object (or
/// top level) holds the keys, as written by the output module.
RunConfig load_config(const std::string& path);

/// Checks cross-field constraints and builds the pump. Throws ValidationError.
PumpProfile build_profile(const RunConfig& cfg, const DerivedConstants& dc);

/// Canonical key=value text (one key per line) of everything but `workers`.
std::string to_text(const RunConfig& cfg);

/// Text form of one field.
std::string field_text(const RunConfig& cfg, const std::string& key);

/// Shortest decimal text that reads back to exactly `x`.
std::string format_number(double x);

/// Parses a number list in any of the forms accepted by `values`.
std::vector<double> parse_grid(const std::string& field, const std::string& spec);

MeanfieldOptions meanfield_options(const RunConfig& cfg);
VarianceOptions variance_options(const RunConfig& cfg);
QuadratureOptions quadrature_options(const RunConfig& cfg);
EnsembleOptions ensemble_options(const RunConfig& cfg);
ScanOptions scan_options(const RunConfig& cfg);
ScanFamily scan_family(const RunConfig& cfg, const DerivedConstants& dc);

}  // namespace nopo
