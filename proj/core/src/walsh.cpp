#include "qsplit/walsh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "qsplit/error.hpp"

namespace qsplit {

namespace {

void butterfly(std::span<double> data) {
  for (std::size_t half = 1; half < data.size(); half <<= 1) {
    for (std::size_t block = 0; block < data.size(); block += 2 * half) {
      for (std::size_t i = block; i < block + half; ++i) {
        const double a = data[i];
        const double b = data[i + half];
        data[i] = a + b;
        data[i + half] = a - b;
      }
    }
  }
}

int bit_count_of_length(std::size_t n) {
  if (n == 0 || !std::has_single_bit(n)) {
    throw Error(ErrorCode::invalid_argument, "Walsh transform needs a power-of-two length");
  }
  const int bits = std::countr_zero(n);
  if (bits > 24) throw Error(ErrorCode::invalid_argument, "Walsh transform limited to 2^24 values");
  return bits;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

/// Exact certificate: max |sum over dropped masks of c_w W_w|.
double dropped_error(const WalshSeries& series, std::span<const std::uint32_t> ranking, std::size_t kept) {
  WalshSeries dropped{series.bits, std::vector<double>(series.coefficients.size(), 0.0)};
  for (std::size_t i = kept; i < ranking.size(); ++i) {
    dropped.coefficients[ranking[i]] = series.coefficients[ranking[i]];
  }
  if (kept >= ranking.size()) return 0.0;
  return max_abs(inverse_fwht(dropped));
}

SparseWalsh build(const WalshSeries& series, std::span<const std::uint32_t> ranking, std::size_t kept,
                  double error) {
  SparseWalsh out;
  out.series = {series.bits, std::vector<double>(series.coefficients.size(), 0.0)};
  out.retained.assign(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(kept));
  for (auto w : out.retained) out.series.coefficients[w] = series.coefficients[w];
  out.sup_error = error;
  return out;
}

void toggle(std::vector<double>& residual, std::uint32_t mask, double coefficient) {
  for (std::size_t x = 0; x < residual.size(); ++x) {
    const bool odd = std::popcount(mask & static_cast<std::uint32_t>(x)) & 1;
    residual[x] -= odd ? -coefficient : coefficient;
  }
}

}  // namespace

WalshSeries fwht(std::span<const double> values) {
  WalshSeries series;
  series.bits = bit_count_of_length(values.size());
  series.coefficients.assign(values.begin(), values.end());
  butterfly(series.coefficients);
  const double scale = 1.0 / static_cast<double>(values.size());
  for (double& c : series.coefficients) c *= scale;
  return series;
}

std::vector<double> inverse_fwht(const WalshSeries& series) {
  bit_count_of_length(series.coefficients.size());
  std::vector<double> values = series.coefficients;
  butterfly(values);
  return values;
}

std::vector<std::uint32_t> rank_masks(const WalshSeries& series) {
  std::vector<std::uint32_t> masks;
  for (std::size_t w = 1; w < series.coefficients.size(); ++w) {
    if (series.coefficients[w] != 0.0) masks.push_back(static_cast<std::uint32_t>(w));
  }
  std::stable_sort(masks.begin(), masks.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double ma = std::fabs(series.coefficients[a]);
    const double mb = std::fabs(series.coefficients[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  if (!series.coefficients.empty() && series.coefficients[0] != 0.0) masks.insert(masks.begin(), 0u);
  return masks;
}

std::vector<double> prefix_errors(const WalshSeries& series) {
  const auto ranking = rank_masks(series);
  std::vector<double> errors(ranking.size() + 1);
  for (std::size_t k = 0; k <= ranking.size(); ++k) errors[k] = dropped_error(series, ranking, k);
  return errors;
}

SparseWalsh sparsify(const WalshSeries& series, std::size_t budget) {
  const auto ranking = rank_masks(series);
  const std::size_t limit = std::min(budget, ranking.size());
  std::size_t best = 0;
  double best_error = dropped_error(series, ranking, 0);
  for (std::size_t k = 1; k <= limit; ++k) {
    const double e = dropped_error(series, ranking, k);
    if (e < best_error) best = k, best_error = e;
  }
  return build(series, ranking, best, best_error);
}

SparseWalsh sparsify_to_tolerance(const WalshSeries& series, double tolerance) {
  if (!(tolerance >= 0.0)) throw Error(ErrorCode::invalid_argument, "tolerance must be >= 0");
  const auto ranking = rank_masks(series);
  // running residual locates candidates cheaply; each candidate is certified exactly
  std::vector<double> residual = inverse_fwht(series);
  for (std::size_t k = 0; k <= ranking.size(); ++k) {
    if (k > 0) toggle(residual, ranking[k - 1], series.coefficients[ranking[k - 1]]);
    if (max_abs(residual) > tolerance * (1.0 + 1e-9) + 1e-15) continue;
    const double certified = dropped_error(series, ranking, k);
    if (certified <= tolerance) return build(series, ranking, k, certified);
  }
  return build(series, ranking, ranking.size(), 0.0);
}

GateCount gate_count(std::span<const std::uint32_t> masks) {
  GateCount count;
  for (auto w : masks) {
    if (w == 0) continue;
    count.rotations += 1;
    count.entangling += 2 * static_cast<std::size_t>(std::popcount(w) - 1);
  }
  return count;
}

GateCount gate_count(const WalshSeries& series) {
  std::vector<std::uint32_t> masks;
  for (std::size_t w = 0; w < series.coefficients.size(); ++w) {
    if (series.coefficients[w] != 0.0) masks.push_back(static_cast<std::uint32_t>(w));
  }
  return gate_count(masks);
}

std::vector<ResourceRow> estimate_step_resources(const EvolutionPlan& plan, double t, int axis,
                                                 std::span<const double> tolerances) {
  if (plan.grid.total_qubits() > 24) {
    throw Error(ErrorCode::size_guard, "resource estimates are limited to 24 qubits");
  }
  if (axis < 0 || axis >= plan.grid.dim()) throw Error(ErrorCode::invalid_argument, "axis out of range");
  const auto symbol = derivative_symbol(stencil_coefficients(plan.order), plan.grid.qubits(axis));
  const auto weights = step_weights(plan, symbol, axis, t, plan.step_size());
  const auto series = fwht(weights);
  const std::size_t nj = static_cast<std::size_t>(plan.grid.qubits(axis));

  std::vector<ResourceRow> rows;
  for (double tolerance : tolerances) {
    const auto sparse = sparsify_to_tolerance(series, tolerance);
    ResourceRow row;
    row.axis = axis;
    row.tolerance = tolerance;
    row.retained_terms = sparse.retained.size();
    row.sup_error = sparse.sup_error;
    row.gates = gate_count(sparse.retained);
    row.qft_gates = 2 * (nj * (nj + 1) / 2);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qsplit
