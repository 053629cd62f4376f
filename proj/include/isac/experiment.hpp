#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isac/config.hpp"

namespace isac {

struct RunOptions {
    std::string subcommand;  // single, coverage, benchmark, cassini, wavesim, oracle
    std::string config_path; // empty: all defaults
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    bool full = false;
};

enum ExitCode : int { exit_ok = 0, exit_crash = 1, exit_validation = 2, exit_infeasible = 3, exit_solver = 4 };

struct RunSummary {
    std::vector<std::string> files;  // data files written, relative to out_dir
    double wall_seconds = 0.0;
};

/// Runs one subcommand and writes its data files plus manifest.json into options.out_dir.
/// Throws isac::Error subclasses; run_cli maps them to exit codes.
RunSummary run_experiment(const RunOptions& options);

/// run_experiment with error reporting: prints to stderr, writes error_report.json, returns the exit code.
int run_cli(const RunOptions& options);

/// Writes through a temporary file and rename, so readers never see partial output.
void write_file_atomic(const std::string& path, const std::string& content);

const std::vector<std::string>& subcommands();

}  // namespace isac
