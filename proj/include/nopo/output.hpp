#pragma once

// Subcommand pipelines and their file documents. Each pipeline returns the
// files it would write; nothing touches the filesystem until write_outputs.
// Documents carry the configuration and code version and no timestamp, so a
// rerun from the embedded configuration reproduces them byte for byte.

#include <string>
#include <vector>

#include "nopo/config.hpp"

namespace nopo {

struct OutputFile {
    std::string path;
    std::string content;
};

/// "nopo <version>", embedded in every document.
std::string code_version();

/// <out>_n0.csv, <out>_variance.csv and <out>_summary.json for one period
/// of the periodic state.
std::vector<OutputFile> cmd_simulate(const RunConfig& cfg);

/// <out>_scan.csv and <out>_scan.json (with the per-curve argmin rows).
std::vector<OutputFile> cmd_scan(const RunConfig& cfg);

/// <out>_mc.json: ensemble metadata, per-point records and the moment
/// residual report.
std::vector<OutputFile> cmd_mc(const RunConfig& cfg);

/// <out>_check.json: regime and linearization validity.
std::vector<OutputFile> cmd_check(const RunConfig& cfg);

/// Writes each file, creating parent directories. Throws std::runtime_error.
void write_outputs(const std::vector<OutputFile>& files);

}  // namespace nopo
