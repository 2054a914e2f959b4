#pragma once

// Walsh-series resource estimates for the diagonal factors of a split step.

#include <cstdint>
#include <span>
#include <vector>

#include "qsplit/evolve.hpp"

namespace qsplit {

/// Coefficients in natural (Hadamard) order: value(x) = sum_w c_w (-1)^{popcount(w & x)}.
struct WalshSeries {
  int bits = 0;                      ///< m
  std::vector<double> coefficients;  ///< 2^m entries indexed by mask w
};

/// Forward transform with 1/2^m scaling (coefficient 0 is the mean).
/// Throws invalid_argument unless the length is 2^m with m <= 24.
WalshSeries fwht(std::span<const double> values);
/// Unscaled transform back to function values.
std::vector<double> inverse_fwht(const WalshSeries& series);

struct SparseWalsh {
  WalshSeries series;                  ///< dropped coefficients set to zero
  std::vector<std::uint32_t> retained;  ///< masks, in ranking order
  double sup_error = 0.0;              ///< exact max |full - truncated|
};

/// Ranking used for truncation: mask 0 first when nonzero, then decreasing
/// magnitude, ties by smaller mask. Zero coefficients are never ranked.
std::vector<std::uint32_t> rank_masks(const WalshSeries& series);

/// Best prefix of the ranking with at most `budget` terms (smallest certified
/// sup error, shortest on ties), so the error is nonincreasing in the budget.
SparseWalsh sparsify(const WalshSeries& series, std::size_t budget);
/// Shortest prefix of the ranking whose certified sup error is <= tolerance.
SparseWalsh sparsify_to_tolerance(const WalshSeries& series, double tolerance);
/// Certified errors of every ranking prefix, index k = number of kept terms.
std::vector<double> prefix_errors(const WalshSeries& series);

struct GateCount {
  std::size_t rotations = 0;
  std::size_t entangling = 0;
  std::size_t total() const { return rotations + entangling; }
};

/// Per nonzero mask w != 0: one rotation and 2 (popcount(w) - 1) entangling gates.
GateCount gate_count(const WalshSeries& series);
GateCount gate_count(std::span<const std::uint32_t> masks);

struct ResourceRow {
  int axis = 0;
  double tolerance = 0.0;
  std::size_t retained_terms = 0;
  double sup_error = 0.0;
  GateCount gates;
  std::size_t qft_gates = 0;  ///< forward + inverse textbook QFT on the axis register
};

inline constexpr double kResourceTolerances[] = {1e-2, 1e-3, 1e-4};

/// Walsh decomposition of the axis factor's mixed-basis diagonal for the step
/// starting at t. Throws size_guard beyond 24 total qubits.
std::vector<ResourceRow> estimate_step_resources(const EvolutionPlan& plan, double t, int axis,
                                                 std::span<const double> tolerances = kResourceTolerances);

}  // namespace qsplit
