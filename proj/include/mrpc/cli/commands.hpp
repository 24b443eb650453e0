#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mrpc::cli {

struct CommandOptions {
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::vector<std::string> y_cols;
    std::optional<int> lmax;
    std::vector<std::string> methods;
    bool dry_run = false;
    std::string input_dir;  // analyze / plot
    std::string train;
    std::string test;
    bool quiet = false;
};

enum ExitCode : int { kSuccess = 0, kComputeFailure = 1, kInputFailure = 2 };

void cmd_simulate(const CommandOptions& options, std::ostream& log);
void cmd_run(const CommandOptions& options, std::ostream& log);
void cmd_analyze(const CommandOptions& options, std::ostream& log);
void cmd_rmsep(const CommandOptions& options, std::ostream& log);
void cmd_plot(const CommandOptions& options, std::ostream& log);

/// Runs a subcommand and maps exceptions to exit codes: ParameterError and
/// InputError give 2, anything else 1. Messages go to `err`.
int dispatch(const std::string& command, const CommandOptions& options, std::ostream& log, std::ostream& err);

}  // namespace mrpc::cli
