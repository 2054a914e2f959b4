#pragma once

// Reference solvers that never use the split-step path: explicit circulant
// matrices, matrix exponentials, a non-split midpoint integrator for the
// semi-discrete ODEs, and closed forms for constant coefficients.
//
// Shift convention: (S^k f)(x) = f(x + k dx), so that
//   D = -i/dx sum_k a_k S^k  satisfies  D e^{2 pi i m x} ~ 2 pi m e^{2 pi i m x}.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsplit/coeffs.hpp"
#include "qsplit/field.hpp"
#include "qsplit/stencil.hpp"

namespace qsplit {

inline constexpr std::size_t kMaxDensePoints = 4096;

struct DenseOperator {
  Eigen::MatrixXcd matrix;
  GridSpec grid;
  std::string label;

  Field apply(const Field& field) const;
};

DenseOperator dense_identity(const GridSpec& grid);
/// Permutation (S_axis)^offset with periodic wrap. Throws size_guard for N > 4096.
DenseOperator dense_shift(const GridSpec& grid, int axis, int offset);
/// D_axis = -i/dx sum_k a_k S^k.
DenseOperator dense_derivative(const GridSpec& grid, int axis, int p);
/// sum_j c_j(t) D_j (convection) or sum_j kappa_j(t) D_j^2 (diffusion).
/// Throws invalid_coefficient when a coefficient depends on its own axis.
DenseOperator dense_generator(const GridSpec& grid, const CoefficientSet& coeffs, int p, double t);
/// Diagonal multiplication by samples of expr at time t.
DenseOperator dense_multiplier(const GridSpec& grid, const Expr& expr, double t);

/// exp(scale * M) by scaling and squaring with a degree-18 Taylor kernel.
DenseOperator matrix_exponential(const DenseOperator& op, std::complex<double> scale);
/// exp(scale * M) through the eigendecomposition of a Hermitian M.
DenseOperator hermitian_exponential(const DenseOperator& op, std::complex<double> scale);

/// max_k |d_k - lambda_k| between the symbol and the sorted eigenvalues of the
/// dense derivative on a 2^n grid (n <= 10).
double verify_symbol_against_dense(const StencilCoefficients& coeffs, int n);

/// Matrix-free generator: coefficients times real-space stencil sums.
class StencilGenerator {
 public:
  StencilGenerator(const GridSpec& grid, const CoefficientSet& coeffs, int p);

  /// Samples coefficients at time t (one value per line along each axis).
  void set_time(double t);
  /// out = G(t) in.
  void apply(std::span<const Complex> in, std::span<Complex> out) const;
  /// Gershgorin-type bound on ||G(t)||_2.
  double norm_bound() const;

  const GridSpec& grid() const { return grid_; }
  EquationKind kind() const { return coeffs_.kind; }

 private:
  void stencil_sum(std::span<const Complex> in, std::span<Complex> out, int axis) const;

  GridSpec grid_;
  CoefficientSet coeffs_;
  StencilCoefficients stencil_;
  std::vector<std::vector<double>> line_values_;  // per axis, per line
  std::vector<double> sup_;                       // per axis max |coefficient|
  mutable std::vector<Complex> scratch_;
};

/// v <- exp(scale * G) v with a Taylor series on substeps of norm <= theta.
void apply_exponential(const StencilGenerator& generator, std::complex<double> scale,
                       std::span<Complex> v, double theta = 1.0);

enum class ReferenceBackend { automatic, dense, matrix_free };

struct ReferenceOptions {
  int steps = 32;  ///< M
  ReferenceBackend backend = ReferenceBackend::matrix_free;
  bool record_trajectory = false;
};

struct ReferenceResult {
  Field final_state;
  std::vector<Field> trajectory;  ///< M+1 snapshots when recorded
  ReferenceBackend backend = ReferenceBackend::matrix_free;
};

/// Non-split midpoint product prod_m exp(-i h G(t_m + h/2)) (convection) or
/// exp(-h G(t_m + h/2)) (diffusion), h = T/M.
ReferenceResult reference_evolution(const GridSpec& grid, const CoefficientSet& coeffs, int p,
                                    double horizon, const Field& initial,
                                    const ReferenceOptions& options = {});

/// Exact ODE solution for constant coefficients: mode k gets
/// exp(-i T sum_j c_j d(k_j)).
Field analytic_constant_convection(const Field& initial, std::span<const double> velocity, int p,
                                   double horizon);
/// Mode k gets exp(-T sum_j kappa_j d(k_j)^2). Throws invalid_coefficient for kappa < 0.
Field analytic_constant_diffusion(const Field& initial, std::span<const double> conductivity,
                                  int p, double horizon);

}  // namespace qsplit
