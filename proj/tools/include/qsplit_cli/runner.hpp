#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qsplit_cli/config.hpp"

namespace qsplit::cli {

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitValidation = 2, kExitNumerical = 3 };

struct RunOptions {
  std::optional<std::filesystem::path> out;  ///< overrides config.output
  int threads = 1;
};

struct RunOutcome {
  int exit_code = kExitOk;
  nlohmann::json report;
};

/// Exit code for an exception escaping a run.
int classify(const std::exception& error);

/// Executes the configured experiment and writes report.json plus CSVs.
/// Never throws; failures are encoded in the exit code and the report.
RunOutcome run(const RunConfig& config, const RunOptions& options = {});

/// Writes report.json for a failure that happened before a run could start.
void write_error_report(const std::filesystem::path& dir, const nlohmann::json& config_echo,
                        const std::exception& error, int exit_code);

}  // namespace qsplit::cli
