// nopo: periodic-state variance, parameter scans and positive-P ensembles
// for a parametric oscillator with a modulated pump.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure, 1 other.

#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "nopo/config.hpp"
#include "nopo/errors.hpp"
#include "nopo/output.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct Command {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> overrides;
};

// gamma_si -> --gamma-si
std::string flag_name(const std::string& key)
{
    std::string flag = "--" + key;
    for (char& c : flag) {
        if (c == '_') c = '-';
    }
    return flag;
}

void add_flags(Command& cmd)
{
    cmd.app->add_option("--config", cmd.config_path, "key=value file, or a JSON output whose config to reuse");
    for (const std::string& key : nopo::config_keys()) {
        cmd.app->add_option(flag_name(key), cmd.overrides[key], "overrides '" + key + "' from the config file");
    }
}

nopo::RunConfig resolve(const Command& cmd)
{
    nopo::RunConfig cfg = cmd.config_path.empty() ? nopo::RunConfig{} : nopo::load_config(cmd.config_path);
    for (const auto& [key, value] : cmd.overrides) {
        if (cmd.app->count(flag_name(key)) > 0) nopo::set_field(cfg, key, value);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Periodic-state squeezing and entanglement of a parametric oscillator under pump modulation"};
    app.set_version_flag("--version", nopo::code_version());
    app.require_subcommand(1);

    Command simulate{app.add_subcommand("simulate", "n0(t) and V(t) over one period plus a summary")};
    Command scan{app.add_subcommand("scan", "V_min along one parameter axis")};
    Command mc{app.add_subcommand("mc", "positive-P Monte Carlo ensemble")};
    Command check{app.add_subcommand("check", "linearization validity only")};
    for (Command* c : {&simulate, &scan, &mc, &check}) add_flags(*c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        std::vector<nopo::OutputFile> files;
        if (*simulate.app) files = nopo::cmd_simulate(resolve(simulate));
        if (*scan.app) files = nopo::cmd_scan(resolve(scan));
        if (*mc.app) files = nopo::cmd_mc(resolve(mc));
        if (*check.app) files = nopo::cmd_check(resolve(check));
        nopo::write_outputs(files);
        for (const auto& f : files) std::printf("%s\n", f.path.c_str());
        return 0;
    } catch (const nopo::ValidationError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const nopo::SolverError& e) {
        std::fprintf(stderr, "solver error: %s (residual %g)\n", e.what(), e.residual());
        return kExitSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
