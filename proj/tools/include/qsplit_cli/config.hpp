#pragma once

// Run configuration for the qsplit tool: strict JSON with every violation
// reported at once.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsplit/analysis.hpp"
#include "qsplit/error.hpp"

namespace qsplit::cli {

enum class Experiment { solve, trotter_scan, resolution_scan, convergence, bounds, resources };

const char* to_string(Experiment experiment);

struct RunConfig {
  EquationKind equation = EquationKind::convection;
  int d = 1;
  int p = 1;
  std::vector<int> n;
  double T = 1.0;
  int L = 1;
  ProductFormula formula = ProductFormula::standard;
  std::vector<std::string> coefficients;
  std::string initial;
  std::vector<std::string> observables{"mean", "scaled-norm"};
  Experiment experiment = Experiment::solve;
  std::vector<int> Ls;
  std::vector<int> ns;
  std::vector<double> tolerances{1e-2, 1e-3, 1e-4};
  std::string output = "qsplit-out";
  std::uint64_t seed = 0;
  bool trajectory = false;
  int reference_steps = 32;

  nlohmann::json source;  ///< the effective JSON after defaults and overrides

  Problem problem() const;
};

/// Thrown for unreadable, malformed or invalid configurations (exit code 2).
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

inline constexpr std::size_t kMaxConfigBytes = 1 << 20;

/// Parses strict JSON text; syntax errors report line and column.
nlohmann::json parse_config_text(const std::string& text);

/// "mean", "scaled-norm", "point:x1,...,xd" (grid node coordinates) or
/// "moment:axis:order" with a 1-based axis.
Observable parse_observable(const std::string& text, int d);

/// Applies "key=value" overrides; the value is read as JSON when it parses,
/// otherwise as a string.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& overrides);

/// Validates and converts; throws ConfigError listing every violation.
RunConfig validate_config(const nlohmann::json& config);

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace qsplit::cli
