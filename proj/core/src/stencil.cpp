#include "qsplit/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "qsplit/error.hpp"

namespace qsplit {

namespace {

void check_order(int p) {
  if (p < 1 || p > kMaxStencilOrder) {
    throw Error(ErrorCode::invalid_argument,
                "stencil order p must lie in [1, 8], got " + std::to_string(p));
  }
}

long double factorial(int k) {
  long double r = 1.0L;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace

StencilCoefficients stencil_coefficients(int p) {
  check_order(p);
  StencilCoefficients c;
  c.order = p;
  c.weights.assign(2 * p + 1, 0.0);
  const long double pf2 = factorial(p) * factorial(p);
  for (int k = 1; k <= p; ++k) {
    const long double sign = (k % 2 == 1) ? 1.0L : -1.0L;
    const long double a = sign * pf2 / (k * factorial(p - k) * factorial(p + k));
    c.weights[p + k] = static_cast<double>(a);
    c.weights[p - k] = static_cast<double>(-a);
  }
  return c;
}

StencilCoefficients stencil_coefficients_from_moments(int p) {
  check_order(p);
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const int size = 2 * p + 1;
  Mat system(size, size);
  for (int j = 0; j < size; ++j) {
    for (int col = 0; col < size; ++col) {
      system(j, col) = std::pow(static_cast<long double>(col - p), j);
    }
  }
  // 0^0 = 1 (std::pow already agrees, spelled out for clarity of the j = 0 row)
  system(0, p) = 1.0L;
  Vec rhs = Vec::Zero(size);
  rhs(1) = 1.0L;
  const Vec solution = system.partialPivLu().solve(rhs);

  StencilCoefficients c;
  c.order = p;
  c.weights.resize(size);
  for (int i = 0; i < size; ++i) c.weights[i] = static_cast<double>(solution(i));
  return c;
}

double moment_residual(const StencilCoefficients& coeffs) {
  const int p = coeffs.order;
  long double worst = 0.0L;
  for (int j = 0; j <= 2 * p; ++j) {
    long double sum = 0.0L;
    long double scale = 0.0L;
    for (int k = -p; k <= p; ++k) {
      const long double term = coeffs[k] * std::pow(static_cast<long double>(k), j);
      sum += term;
      scale += std::fabs(term);
    }
    const long double target = (j == 1) ? 1.0L : 0.0L;
    worst = std::max(worst, std::fabs(sum - target) / std::max(1.0L, scale));
  }
  return static_cast<double>(worst);
}

double DerivativeSymbol::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::fabs(v));
  return m;
}

DerivativeSymbol derivative_symbol(const StencilCoefficients& coeffs, int n) {
  if (n < 1 || n > 30) {
    throw Error(ErrorCode::invalid_argument, "qubit count out of range: " + std::to_string(n));
  }
  const std::size_t points = std::size_t{1} << n;
  if (points <= static_cast<std::size_t>(2 * coeffs.order)) {
    throw Error(ErrorCode::grid_too_coarse,
                "grid of " + std::to_string(points) + " points cannot hold a stencil of order " +
                    std::to_string(coeffs.order));
  }
  DerivativeSymbol symbol;
  symbol.qubits = n;
  symbol.values.assign(points, 0.0);
  const double inv_dx = static_cast<double>(points);
  for (std::size_t k = 1; k < points; ++k) {
    double sum = 0.0;
    for (int q = 1; q <= coeffs.order; ++q) {
      // reduce q*k mod N before scaling so the sine argument stays in [0, 2 pi)
      const std::size_t phase_index = (static_cast<std::size_t>(q) * k) % points;
      sum += coeffs[q] * std::sin(2.0 * std::numbers::pi * static_cast<double>(phase_index) /
                                  static_cast<double>(points));
    }
    symbol.values[k] = 2.0 * inv_dx * sum;
  }
  // exact odd symmetry; the sine of the mirrored argument may differ in the last ulp
  for (std::size_t k = points / 2 + 1; k < points; ++k) symbol.values[k] = -symbol.values[points - k];
  if (points % 2 == 0) symbol.values[points / 2] = 0.0;
  return symbol;
}

}  // namespace qsplit
