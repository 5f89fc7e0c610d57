#include "nopo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "nopo/errors.hpp"

namespace nopo {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Shortest text that reads back to the same double.
std::string format_double(double x)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text)
{
    const std::string s = trim(text);
    double x = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(x)) {
        throw ValidationError(key + ": expected a finite number, got '" + text + "'");
    }
    return x;
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& text)
{
    const std::string s = trim(text);
    Int x = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
        throw ValidationError(key + ": expected a non-negative integer, got '" + text + "'");
    }
    return x;
}

bool parse_bool(const std::string& key, const std::string& text)
{
    const std::string s = trim(text);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ValidationError(key + ": expected true or false, got '" + text + "'");
}

struct Field {
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

Field real(const std::string& key, double RunConfig::*member)
{
    return {key, [member](const RunConfig& c) { return format_double(c.*member); },
            [key, member](RunConfig& c, const std::string& v) { c.*member = parse_double(key, v); }};
}

Field param(const std::string& key, double SystemParams::*member)
{
    return {key, [member](const RunConfig& c) { return format_double(c.params.*member); },
            [key, member](RunConfig& c, const std::string& v) { c.params.*member = parse_double(key, v); }};
}

template <class Int>
Field integer(const std::string& key, Int RunConfig::*member)
{
    return {key, [member](const RunConfig& c) { return std::to_string(c.*member); },
            [key, member](RunConfig& c, const std::string& v) { c.*member = parse_integer<Int>(key, v); }};
}

Field text(const std::string& key, std::string RunConfig::*member)
{
    return {key, [member](const RunConfig& c) { return c.*member; },
            [member](RunConfig& c, const std::string& v) { c.*member = trim(v); }};
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        param("gamma", &SystemParams::gamma),
        param("gamma3", &SystemParams::gamma3),
        param("k", &SystemParams::k),
        text("profile", &RunConfig::profile),
        text("units", &RunConfig::units),
        real("f0", &RunConfig::f0),
        real("f1", &RunConfig::f1),
        real("delta", &RunConfig::delta),
        real("fL", &RunConfig::fL),
        real("T1", &RunConfig::T1),
        real("T2", &RunConfig::T2),
        integer("grid", &RunConfig::grid),
        real("rtol", &RunConfig::rtol),
        real("period_tol", &RunConfig::period_tol),
        real("quad_rtol", &RunConfig::quad_rtol),
        integer("n_traj", &RunConfig::n_traj),
        real("dt", &RunConfig::dt),
        integer("seed", &RunConfig::seed),
        real("transient", &RunConfig::transient),
        integer("samples", &RunConfig::samples),
        integer("periods", &RunConfig::periods),
        {"workers", [](const RunConfig& c) { return std::to_string(c.workers); },
         [](RunConfig& c, const std::string& v) { c.workers = parse_integer<int>("workers", v); }},
        real("gamma_si", &RunConfig::gamma_si),
        text("out", &RunConfig::out),
        text("axis", &RunConfig::axis),
        text("values", &RunConfig::values),
        text("series", &RunConfig::series),
        real("validity_factor", &RunConfig::validity_factor),
        {"enforce_validity", [](const RunConfig& c) { return std::string(c.enforce_validity ? "true" : "false"); },
         [](RunConfig& c, const std::string& v) { c.enforce_validity = parse_bool("enforce_validity", v); }},
    };
    return table;
}

const Field& find_field(const std::string& key)
{
    for (const Field& f : fields()) {
        if (f.key == key) return f;
    }
    throw ValidationError(key + ": unknown configuration key");
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void require_positive(const std::string& key, double x)
{
    if (!(x > 0.0)) throw ValidationError(key + ": must be > 0");
}

}  // namespace

std::string format_number(double x) { return format_double(x); }

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const Field& f : fields()) k.push_back(f.key);
        return k;
    }();
    return keys;
}

void set_field(RunConfig& cfg, const std::string& key, const std::string& value)
{
    find_field(key).set(cfg, value);
}

std::string field_text(const RunConfig& cfg, const std::string& key)
{
    return find_field(key).get(cfg);
}

void apply_text(RunConfig& cfg, const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
        }
        set_field(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

RunConfig load_config(const std::string& path)
{
    const std::string content = read_file(path);
    RunConfig cfg;
    if (trim(content).starts_with('{')) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(content);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("config: '" + path + "' is not valid JSON: " + e.what());
        }
        const nlohmann::json& obj = doc.contains("config") ? doc["config"] : doc;
        if (!obj.is_object()) throw ValidationError("config: expected a JSON object of keys");
        for (const auto& [key, value] : obj.items()) {
            set_field(cfg, key, value.is_string() ? value.get<std::string>() : value.dump());
        }
    } else {
        apply_text(cfg, content);
    }
    return cfg;
}

std::string to_text(const RunConfig& cfg)
{
    std::string out;
    for (const Field& f : fields()) {
        if (f.key == "workers") continue;
        out += f.key + "=" + f.get(cfg) + "\n";
    }
    return out;
}

PumpProfile build_profile(const RunConfig& cfg, const DerivedConstants& dc)
{
    double scale = 1.0;
    if (cfg.units == "threshold") {
        scale = dc.f_th;
    } else if (cfg.units != "absolute") {
        throw ValidationError("units: expected absolute or threshold, got '" + cfg.units + "'");
    }
    try {
        if (cfg.profile == "constant") return PumpProfile::constant(cfg.f0 * scale);
        if (cfg.profile == "harmonic") return PumpProfile::harmonic(cfg.f0 * scale, cfg.f1 * scale, cfg.delta);
        if (cfg.profile == "pulse") return PumpProfile::pulse_train(cfg.fL * scale, cfg.T1, cfg.T2);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("profile ") + cfg.profile + ": " + e.what());
    }
    throw ValidationError("profile: expected constant, harmonic or pulse, got '" + cfg.profile + "'");
}

std::vector<double> parse_grid(const std::string& field, const std::string& spec)
{
    const std::string s = trim(spec);
    if (s.empty()) throw ValidationError(field + ": scan grid is empty");
    std::vector<std::string> parts;
    const char sep = s.find(':') != std::string::npos ? ':' : ',';
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, sep);) parts.push_back(trim(p));

    if (sep == ',') {
        std::vector<double> out;
        for (const auto& p : parts) out.push_back(parse_double(field, p));
        return out;
    }
    if (parts.size() != 4 || (parts[0] != "lin" && parts[0] != "log")) {
        throw ValidationError(field + ": expected lin:a:b:n or log:a:b:n, got '" + spec + "'");
    }
    const double a = parse_double(field, parts[1]);
    const double b = parse_double(field, parts[2]);
    const auto n = parse_integer<std::size_t>(field, parts[3]);
    if (n == 0) throw ValidationError(field + ": scan grid is empty");
    const bool logarithmic = parts[0] == "log";
    if (logarithmic && !(a > 0.0 && b > 0.0)) throw ValidationError(field + ": log grid needs positive endpoints");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = logarithmic ? std::exp(std::log(a) + u * (std::log(b) - std::log(a))) : a + u * (b - a);
    }
    return out;
}

MeanfieldOptions meanfield_options(const RunConfig& cfg)
{
    if (cfg.grid < 3) throw ValidationError("grid: must be >= 3");
    require_positive("rtol", cfg.rtol);
    require_positive("period_tol", cfg.period_tol);
    MeanfieldOptions o;
    o.grid = cfg.grid;
    o.rtol = cfg.rtol;
    return o;
}

VarianceOptions variance_options(const RunConfig& cfg)
{
    if (cfg.grid < 3) throw ValidationError("grid: must be >= 3");
    require_positive("rtol", cfg.rtol);
    require_positive("period_tol", cfg.period_tol);
    VarianceOptions o;
    o.grid = cfg.grid;
    o.rtol = cfg.rtol;
    o.period_tol = cfg.period_tol;
    return o;
}

QuadratureOptions quadrature_options(const RunConfig& cfg)
{
    require_positive("quad_rtol", cfg.quad_rtol);
    QuadratureOptions o;
    o.rtol = cfg.quad_rtol;
    o.fail_rtol = std::max(o.fail_rtol, 100.0 * cfg.quad_rtol);
    return o;
}

EnsembleOptions ensemble_options(const RunConfig& cfg)
{
    if (cfg.n_traj < 2) throw ValidationError("n_traj: must be >= 2");
    require_positive("dt", cfg.dt);
    if (cfg.samples < 16) throw ValidationError("samples: must be >= 16 per period");
    if (cfg.periods < 1) throw ValidationError("periods: must be >= 1");
    if (!(cfg.transient >= 0.0)) throw ValidationError("transient: must be >= 0");
    if (cfg.workers < 0) throw ValidationError("workers: must be >= 0");
    EnsembleOptions o;
    o.n_trajectories = cfg.n_traj;
    o.seed = cfg.seed;
    o.dt = cfg.dt;
    o.transient = cfg.transient;
    o.samples_per_period = cfg.samples;
    o.periods = cfg.periods;
    o.workers = cfg.workers;
    return o;
}

ScanOptions scan_options(const RunConfig& cfg)
{
    require_positive("validity_factor", cfg.validity_factor);
    ScanOptions o;
    o.meanfield = meanfield_options(cfg);
    o.variance = variance_options(cfg);
    o.quadrature = quadrature_options(cfg);
    o.validity_factor = cfg.validity_factor;
    o.enforce_validity = cfg.enforce_validity;
    o.workers = cfg.workers;
    return o;
}

ScanFamily scan_family(const RunConfig& cfg, const DerivedConstants& dc)
{
    const PumpProfile profile = build_profile(cfg, dc);
    ScanFamily fam;
    fam.fbar_over_fth = profile.mean() / dc.f_th;
    if (const auto* h = profile.as_harmonic()) {
        fam.f1_over_fbar = h->f0 > 0.0 ? h->f1 / h->f0 : 0.0;
        fam.delta_over_gamma = h->delta / dc.gamma;
    } else if (const auto* p = profile.as_pulse_train()) {
        fam.pulsed = true;
        fam.T1 = p->T1;
        fam.T2 = p->T2;
    }
    return fam;
}

}  // namespace nopo
