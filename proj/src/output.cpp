#include "nopo/output.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "nopo/errors.hpp"
#include "nopo/positive_p.hpp"
#include "nopo/scan.hpp"
#include "nopo/semiclassical.hpp"
#include "nopo/variance.hpp"

#ifndef NOPO_VERSION
#define NOPO_VERSION "0.0.0"
#endif

namespace nopo {

namespace {

using Json = nlohmann::ordered_json;

Json config_json(const RunConfig& cfg)
{
    Json j = Json::object();
    for (const std::string& key : config_keys()) {
        if (key != "workers") j[key] = field_text(cfg, key);
    }
    return j;
}

Json header(const RunConfig& cfg, const char* command)
{
    Json j;
    j["version"] = code_version();
    j["command"] = command;
    j["config"] = config_json(cfg);
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string csv_preamble(const RunConfig& cfg, const char* command)
{
    std::string s = "# " + code_version() + " " + command + "\n";
    const std::string text = to_text(cfg);
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = text.find('\n', start);
        s += "# config " + text.substr(start, end - start) + "\n";
        start = end + 1;
    }
    return s;
}

std::string num(double x) { return format_number(x); }

// Rate used for output-field fluxes: gamma_si when given, else gamma.
double output_gamma(const RunConfig& cfg) { return cfg.gamma_si > 0.0 ? cfg.gamma_si : cfg.params.gamma; }

const char* output_unit(const RunConfig& cfg) { return cfg.gamma_si > 0.0 ? OutputFlux::unit : "gamma"; }

Json validity_json(const Validity& v, double factor)
{
    Json j;
    j["valid"] = v.valid;
    j["margin"] = v.margin;
    j["factor"] = factor;
    return j;
}

}  // namespace

std::string code_version() { return std::string("nopo ") + NOPO_VERSION; }

std::vector<OutputFile> cmd_simulate(const RunConfig& cfg)
{
    const DerivedConstants dc = derive_constants(cfg.params);
    const PumpProfile profile = build_profile(cfg, dc);
    const MeanfieldOptions mf = meanfield_options(cfg);
    const VarianceOptions vo = variance_options(cfg);
    const QuadratureOptions qo = quadrature_options(cfg);
    if (cfg.gamma_si < 0.0) throw ValidationError("gamma_si: must be >= 0");

    const Regime regime = regime_classify(profile, dc);
    if (regime == Regime::Critical) throw SolverError("no nontrivial branch: pump is at threshold", 0.0);
    const SemiclassicalTrace n0 = meanfield_ode(cfg.params, dc, profile, mf);
    if (!n0.converged) throw SolverError("semiclassical trace did not converge", n0.periodicity_residual);
    const VarianceTrace vt = variance_ode(cfg.params, dc, profile, n0, vo);
    if (!vt.converged) throw SolverError("variance trace did not converge", vt.periodicity_residual);

    const double g_out = output_gamma(cfg);
    const std::string unit = output_unit(cfg);

    std::string n0_csv = csv_preamble(cfg, "simulate");
    n0_csv += "# n0_out = 2 gamma n0 in units of " + unit + "\n";
    n0_csv += "t,n0,n0_out\n";
    for (std::size_t i = 0; i < n0.t.size(); ++i) {
        n0_csv += num(n0.t[i]) + "," + num(n0.n0[i]) + "," + num(to_output(n0.n0[i], g_out).value) + "\n";
    }

    std::string v_csv = csv_preamble(cfg, "simulate");
    v_csv += "# V_out = 2 gamma V in units of " + unit + "\n";
    v_csv += "t,V,V_out,classification\n";
    for (std::size_t i = 0; i < vt.t.size(); ++i) {
        v_csv += num(vt.t[i]) + "," + num(vt.V[i]) + "," + num(to_output(vt.V[i], g_out).value) + "," +
                 to_string(vt.classification[i]) + "\n";
    }

    const double V_max = *std::max_element(vt.V.begin(), vt.V.end());
    const double n_min =
        regime == Regime::Above ? photon_number_quadrature(cfg.params, dc, profile, vt.t_m, qo) : 0.0;

    Json s = header(cfg, "simulate");
    s["regime"] = to_string(regime);
    s["period"] = vt.period;
    s["V_min"] = vt.V_min;
    s["t_m"] = vt.t_m;
    s["V_max"] = V_max;
    s["n_min"] = n_min;
    s["classification"] = to_string(classify(vt.V_min));
    s["epr"] = classify(vt.V_min) == Entanglement::EPR;
    s["inseparable"] = V_max < 1.0;  // V < 1 over the whole period
    s["validity"] = validity_json(validity_check(cfg.params, dc, profile, cfg.validity_factor), cfg.validity_factor);
    s["linearization_valid"] = dc.linearization_valid();
    s["adiabatic_valid"] = cfg.params.adiabatic_valid();
    s["converged"] = vt.converged;
    s["periods"] = vt.periods;
    s["periodicity_residual"] = vt.periodicity_residual;
    if (profile.as_pulse_train()) {
        const PulsedMinimum pm = vmin_pulsed(cfg.params, dc, profile);
        s["pulsed_formula"] = {{"V_min", pm.V_min}, {"epsL_T1", pm.eps_L_T1}, {"short_pulse", pm.short_pulse}};
    }
    s["output"] = {{"unit", unit},
                   {"V_min_out", to_output(vt.V_min, g_out).value},
                   {"n_min_out", to_output(n_min, g_out).value}};

    return {{cfg.out + "_n0.csv", n0_csv}, {cfg.out + "_variance.csv", v_csv}, {cfg.out + "_summary.json", dump(s)}};
}

std::vector<OutputFile> cmd_scan(const RunConfig& cfg)
{
    const DerivedConstants dc = derive_constants(cfg.params);
    const ScanAxis axis = scan_axis_from_string(cfg.axis);
    const std::vector<double> grid = parse_grid("values", cfg.values);
    const std::vector<double> series = parse_grid("series", cfg.series);
    const ScanFamily family = scan_family(cfg, dc);
    const ScanResult result = scan_vmin(cfg.params, family, axis, grid, series, scan_options(cfg));

    std::string csv = csv_preamble(cfg, "scan");
    csv += std::string(to_string(axis)) + ",f1_over_fbar,V_min,t_m,n_min,epr,valid,margin,error\n";
    for (const ScanRow& r : result.rows) {
        std::string error = r.error;
        std::replace(error.begin(), error.end(), ',', ';');
        csv += num(r.axis_value) + "," + num(r.series) + "," + num(r.V_min) + "," + num(r.t_m) + "," +
               num(r.n_min) + "," + (r.epr ? "1" : "0") + "," + (r.valid ? "1" : "0") + "," + num(r.margin) + "," +
               error + "\n";
    }

    auto row_json = [](const ScanRow& r) {
        Json j;
        j["axis_value"] = r.axis_value;
        j["f1_over_fbar"] = r.series;
        j["V_min"] = r.V_min;
        j["t_m"] = r.t_m;
        j["n_min"] = r.n_min;
        j["epr"] = r.epr;
        j["valid"] = r.valid;
        j["margin"] = r.margin;
        return j;
    };
    Json s = header(cfg, "scan");
    s["axis"] = to_string(axis);
    s["rows"] = result.rows.size();
    s["failed_rows"] = std::count_if(result.rows.begin(), result.rows.end(), [](const ScanRow& r) { return !r.ok(); });
    s["argmin"] = Json::array();
    for (const ScanRow& r : argmin_rows(result)) s["argmin"].push_back(row_json(r));
    s["errors"] = Json::array();
    for (const ScanRow& r : result.rows) {
        if (!r.ok()) s["errors"].push_back({{"axis_value", r.axis_value}, {"f1_over_fbar", r.series}, {"error", r.error}});
    }
    return {{cfg.out + "_scan.csv", csv}, {cfg.out + "_scan.json", dump(s)}};
}

std::vector<OutputFile> cmd_mc(const RunConfig& cfg)
{
    const DerivedConstants dc = derive_constants(cfg.params);
    const PumpProfile profile = build_profile(cfg, dc);
    const EnsembleStats st = ensemble_run(cfg.params, dc, profile, ensemble_options(cfg));
    const ResidualReport rep = moment_residual_check(cfg.params, dc, profile, st);

    Json s = header(cfg, "mc");
    s["metadata"] = {{"seed", st.seed},
                     {"n_traj", st.n_trajectories},
                     {"dt", st.dt},
                     {"transient", st.transient},
                     {"escaped", st.n_escaped},
                     {"rng", st.rng},
                     {"experimental", st.experimental},
                     {"escape_warning", st.escape_warning}};
    Json records = Json::array();
    for (std::size_t k = 0; k < st.t.size(); ++k) {
        records.push_back({{"t", st.t[k]},
                           {"V", st.V[k]},
                           {"SE_V", st.se_V[k]},
                           {"n_plus", st.n_plus[k].mean.real()},
                           {"SE_n", st.n_plus[k].se_re}});
    }
    s["records"] = std::move(records);
    s["residual_check"] = {{"fraction_within_n_plus", rep.fraction_within_n_plus},
                           {"fraction_within_R", rep.fraction_within_R},
                           {"passed", rep.passed},
                           {"t", rep.t},
                           {"z_n_plus", rep.z_n_plus},
                           {"z_R", rep.z_R}};
    return {{cfg.out + "_mc.json", dump(s)}};
}

std::vector<OutputFile> cmd_check(const RunConfig& cfg)
{
    const DerivedConstants dc = derive_constants(cfg.params);
    const PumpProfile profile = build_profile(cfg, dc);
    if (!(cfg.validity_factor > 0.0)) throw ValidationError("validity_factor: must be > 0");
    Json s = header(cfg, "check");
    s["regime"] = to_string(regime_classify(profile, dc));
    s["fbar_over_fth"] = profile.mean() / dc.f_th;
    s["f_th"] = dc.f_th;
    s["lambda_over_gamma"] = dc.lambda_over_gamma;
    s["validity"] = validity_json(validity_check(cfg.params, dc, profile, cfg.validity_factor), cfg.validity_factor);
    s["linearization_valid"] = dc.linearization_valid();
    s["adiabatic_valid"] = cfg.params.adiabatic_valid();
    return {{cfg.out + "_check.json", dump(s)}};
}

void write_outputs(const std::vector<OutputFile>& files)
{
    for (const OutputFile& f : files) {
        const std::filesystem::path p(f.path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out << f.content;
        if (!out) throw std::runtime_error("cannot write '" + f.path + "'");
    }
}

}  // namespace nopo
