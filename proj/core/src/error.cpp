#include "qsplit/error.hpp"

#include <sstream>

namespace qsplit {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::grid_too_coarse: return "grid-too-coarse";
    case ErrorCode::degenerate_state: return "degenerate-state";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::size_guard: return "size-guard";
    case ErrorCode::parse: return "parse";
    case ErrorCode::evaluation: return "evaluation";
    case ErrorCode::invalid_coefficient: return "invalid-coefficient";
    case ErrorCode::validation: return "validation";
    case ErrorCode::reference_not_converged: return "reference-not-converged";
    case ErrorCode::degenerate_fit: return "degenerate-fit";
    case ErrorCode::regime_not_reached: return "regime-not-reached";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

bool Error::is_numerical_contract() const noexcept {
  return code_ == ErrorCode::reference_not_converged ||
         code_ == ErrorCode::degenerate_fit ||
         code_ == ErrorCode::regime_not_reached;
}

namespace {

std::string format_parse(std::size_t offset, const std::string& message,
                         const std::vector<std::string>& expected) {
  std::ostringstream os;
  os << "offset " << offset << ": " << message;
  if (!expected.empty()) {
    os << " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) os << ", ";
      os << expected[i];
    }
    os << ")";
  }
  return os.str();
}

std::string format_eval(const std::string& message,
                        const std::vector<double>& point, double time) {
  std::ostringstream os;
  os.precision(17);
  os << message << " at x=(";
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (i) os << ", ";
    os << point[i];
  }
  os << "), t=" << time;
  return os.str();
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::string message,
                       std::vector<std::string> expected)
    : Error(ErrorCode::parse, format_parse(offset, message, expected)),
      offset_(offset),
      expected_(std::move(expected)) {}

EvalError::EvalError(std::string message, std::vector<double> point, double time)
    : Error(ErrorCode::evaluation, format_eval(message, point, time)),
      point_(std::move(point)),
      time_(time) {}

}  // namespace qsplit
