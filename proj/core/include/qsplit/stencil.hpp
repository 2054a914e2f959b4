#pragma once

// Centered finite-difference weights for the first derivative on a periodic
// grid, and the Fourier symbol of the resulting circulant operator.

#include <vector>

namespace qsplit {

inline constexpr int kMaxStencilOrder = 8;

/// Weights a_k, k = -p..p, of the centered first-derivative stencil
///   f'(x) ~ (1/dx) sum_k a_k f(x + k dx),  error O(dx^{2p}).
struct StencilCoefficients {
  int order = 0;                ///< p
  std::vector<double> weights;  ///< a_{-p}, ..., a_p (size 2p+1)

  /// Weight for offset k in [-p, p].
  double operator[](int k) const { return weights[static_cast<std::size_t>(k + order)]; }
};

/// Closed-form weights. Throws ErrorCode::invalid_argument unless 1 <= p <= 8.
StencilCoefficients stencil_coefficients(int p);

/// Weights from solving the (2p+1) x (2p+1) moment system
/// sum_k a_k k^j = delta_{j,1}, j = 0..2p (partial pivoting, extended precision).
StencilCoefficients stencil_coefficients_from_moments(int p);

/// max_j |sum_k a_k k^j - delta_{j,1}| / max(1, sum_k |a_k k^j|), j = 0..2p.
double moment_residual(const StencilCoefficients& coeffs);

/// Eigenvalues of the discrete derivative operator on a 2^n periodic grid.
struct DerivativeSymbol {
  int qubits = 0;              ///< n
  std::vector<double> values;  ///< d_k for k = 0..2^n - 1

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
  double max_abs() const;
};

/// d_k = (2/dx) sum_{q=1}^{p} a_q sin(2 pi q k / 2^n), dx = 2^{-n}.
/// Throws ErrorCode::grid_too_coarse when 2^n <= 2p.
DerivativeSymbol derivative_symbol(const StencilCoefficients& coeffs, int n);

}  // namespace qsplit
