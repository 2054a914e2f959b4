#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsplit {

enum class ErrorCode {
  invalid_argument,
  grid_too_coarse,
  degenerate_state,
  grid_mismatch,
  size_guard,
  parse,
  evaluation,
  invalid_coefficient,
  validation,
  reference_not_converged,
  degenerate_fit,
  regime_not_reached,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// True for failures of a numerical contract (as opposed to bad input).
  bool is_numerical_contract() const noexcept;

 private:
  ErrorCode code_;
};

/// Syntax or name-resolution failure in the expression language.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string message,
             std::vector<std::string> expected = {});

  /// 0-based byte offset into the source text.
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Domain failure while evaluating an expression; carries the offending point.
class EvalError : public Error {
 public:
  EvalError(std::string message, std::vector<double> point, double time);

  const std::vector<double>& point() const noexcept { return point_; }
  double time() const noexcept { return time_; }

 private:
  std::vector<double> point_;
  double time_;
};

}  // namespace qsplit
