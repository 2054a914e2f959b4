#include "qsplit/oracle.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qsplit/error.hpp"

namespace qsplit {

namespace {

void guard_dense(const GridSpec& grid) {
  if (grid.size() > kMaxDensePoints) {
    throw Error(ErrorCode::size_guard, "dense operators are limited to 4096 points, grid has " +
                                           std::to_string(grid.size()));
  }
}

void check_axis(const GridSpec& grid, int axis) {
  if (axis < 0 || axis >= grid.dim()) throw Error(ErrorCode::invalid_argument, "axis out of range");
}

void check_stencil_fits(const GridSpec& grid, int axis, int p) {
  if (grid.points(axis) <= static_cast<std::size_t>(2 * p)) {
    throw Error(ErrorCode::grid_too_coarse, "axis " + std::to_string(axis + 1) +
                                                " has too few points for stencil order " +
                                                std::to_string(p));
  }
}

/// Flat index of `flat` moved by `offset` along `axis`, periodic.
std::size_t shifted_index(const GridSpec& grid, std::size_t flat, int axis, long offset) {
  const auto n = static_cast<long>(grid.points(axis));
  const std::size_t stride = grid.stride(axis);
  const long k = static_cast<long>((flat / stride) % static_cast<std::size_t>(n));
  const long moved = ((k + offset) % n + n) % n;
  return flat - static_cast<std::size_t>(k) * stride + static_cast<std::size_t>(moved) * stride;
}

void check_independent(const GridSpec& grid, const CoefficientSet& coeffs, double t) {
  const std::array<double, 1> times{t};
  const auto report = validate_independence(coeffs, grid, times);
  if (!report.passed) throw Error(ErrorCode::invalid_coefficient, report.summary());
}

}  // namespace

Field DenseOperator::apply(const Field& field) const {
  if (!(field.grid() == grid)) throw Error(ErrorCode::grid_mismatch, "operator and field grids differ");
  Eigen::Map<const Eigen::VectorXcd> in(field.amplitudes().data(), static_cast<Eigen::Index>(field.size()));
  const Eigen::VectorXcd result = matrix * in;
  return Field(grid, std::vector<Complex>(result.data(), result.data() + result.size()), field.time());
}

DenseOperator dense_identity(const GridSpec& grid) {
  guard_dense(grid);
  const auto n = static_cast<Eigen::Index>(grid.size());
  return {Eigen::MatrixXcd::Identity(n, n), grid, "I"};
}

DenseOperator dense_shift(const GridSpec& grid, int axis, int offset) {
  guard_dense(grid);
  check_axis(grid, axis);
  const auto n = static_cast<Eigen::Index>(grid.size());
  DenseOperator op{Eigen::MatrixXcd::Zero(n, n), grid, "S" + std::to_string(axis + 1) + "^" + std::to_string(offset)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // (S^k v)[i] = v[i + k e_axis]
    op.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(shifted_index(grid, i, axis, offset))) = 1.0;
  }
  return op;
}

DenseOperator dense_derivative(const GridSpec& grid, int axis, int p) {
  guard_dense(grid);
  check_axis(grid, axis);
  check_stencil_fits(grid, axis, p);
  const auto stencil = stencil_coefficients(p);
  const auto n = static_cast<Eigen::Index>(grid.size());
  DenseOperator op{Eigen::MatrixXcd::Zero(n, n), grid, "D" + std::to_string(axis + 1)};
  const Complex factor(0.0, -1.0 / grid.spacing(axis));
  for (int k = -p; k <= p; ++k) {
    if (k == 0) continue;
    op.matrix += factor * stencil[k] * dense_shift(grid, axis, k).matrix;
  }
  return op;
}

DenseOperator dense_multiplier(const GridSpec& grid, const Expr& expr, double t) {
  guard_dense(grid);
  const Field samples = sample_function(grid, expr, t);
  const auto n = static_cast<Eigen::Index>(grid.size());
  DenseOperator op{Eigen::MatrixXcd::Zero(n, n), grid, expr.to_string()};
  for (Eigen::Index i = 0; i < n; ++i) op.matrix(i, i) = samples[static_cast<std::size_t>(i)];
  return op;
}

DenseOperator dense_generator(const GridSpec& grid, const CoefficientSet& coeffs, int p, double t) {
  guard_dense(grid);
  if (coeffs.dim() != grid.dim()) throw Error(ErrorCode::invalid_argument, "coefficient count does not match grid");
  check_independent(grid, coeffs, t);
  const auto n = static_cast<Eigen::Index>(grid.size());
  DenseOperator op{Eigen::MatrixXcd::Zero(n, n), grid,
                   coeffs.kind == EquationKind::convection ? "H" : "A"};
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const Eigen::MatrixXcd d = dense_derivative(grid, axis, p).matrix;
    const Eigen::MatrixXcd c = dense_multiplier(grid, coeffs[axis], t).matrix;
    if (coeffs.kind == EquationKind::convection) {
      op.matrix += c * d;
    } else {
      op.matrix += c * (d * d);
    }
  }
  return op;
}

DenseOperator matrix_exponential(const DenseOperator& op, std::complex<double> scale) {
  guard_dense(op.grid);
  if (!op.matrix.allFinite()) throw Error(ErrorCode::invalid_argument, "matrix has non-finite entries");
  const auto n = op.matrix.rows();
  Eigen::MatrixXcd a = scale * op.matrix;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  a /= std::ldexp(1.0, squarings);

  // Horner form of sum_{k<=18} a^k / k!; remainder < 0.5^19/19! at ||a||_1 <= 0.5
  constexpr int kDegree = 18;
  const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd result = identity + a / static_cast<double>(kDegree);
  for (int k = kDegree - 1; k >= 1; --k) result = identity + (a * result) / static_cast<double>(k);
  for (int s = 0; s < squarings; ++s) result = result * result;
  return {std::move(result), op.grid, "exp(" + op.label + ")"};
}

DenseOperator hermitian_exponential(const DenseOperator& op, std::complex<double> scale) {
  guard_dense(op.grid);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(op.matrix);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::invalid_argument, "eigendecomposition failed");
  const Eigen::VectorXcd factors =
      (scale * solver.eigenvalues().cast<std::complex<double>>()).array().exp().matrix();
  Eigen::MatrixXcd result = solver.eigenvectors() * factors.asDiagonal() * solver.eigenvectors().adjoint();
  return {std::move(result), op.grid, "exp(" + op.label + ")"};
}

double verify_symbol_against_dense(const StencilCoefficients& coeffs, int n) {
  if (n < 1 || n > 10) throw Error(ErrorCode::invalid_argument, "verify_symbol_against_dense needs 1 <= n <= 10");
  const GridSpec grid({n});
  const auto symbol = derivative_symbol(coeffs, n);
  const auto dense = dense_derivative(grid, 0, coeffs.order);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense.matrix, Eigen::EigenvaluesOnly);
  std::vector<double> eigen(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  std::vector<double> values = symbol.values;
  std::sort(eigen.begin(), eigen.end());
  std::sort(values.begin(), values.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) worst = std::max(worst, std::fabs(values[i] - eigen[i]));
  return worst;
}

StencilGenerator::StencilGenerator(const GridSpec& grid, const CoefficientSet& coeffs, int p)
    : grid_(grid), coeffs_(coeffs), stencil_(stencil_coefficients(p)) {
  if (coeffs.dim() != grid.dim()) throw Error(ErrorCode::invalid_argument, "coefficient count does not match grid");
  for (int axis = 0; axis < grid.dim(); ++axis) check_stencil_fits(grid, axis, p);
  line_values_.assign(static_cast<std::size_t>(grid.dim()), std::vector<double>(grid.size()));
  sup_.assign(static_cast<std::size_t>(grid.dim()), 0.0);
  scratch_.resize(grid.size());
  set_time(0.0);
}

void StencilGenerator::set_time(double t) {
  std::array<double, 3> x{};
  const std::span<double> coords(x.data(), static_cast<std::size_t>(grid_.dim()));
  for (int axis = 0; axis < grid_.dim(); ++axis) {
    auto& values = line_values_[axis];
    double sup = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      grid_.coordinates(i, coords);
      values[i] = coeffs_[axis].evaluate(coords, t);
      sup = std::max(sup, std::fabs(values[i]));
    }
    sup_[axis] = sup;
  }
}

void StencilGenerator::stencil_sum(std::span<const Complex> in, std::span<Complex> out, int axis) const {
  const double inv_dx = 1.0 / grid_.spacing(axis);
  const std::size_t n = grid_.points(axis);
  const std::size_t stride = grid_.stride(axis);
  const std::size_t pad = static_cast<std::size_t>(stencil_.order);
  std::vector<Complex> line(n + 2 * pad);
  for (std::size_t l = 0; l < grid_.lines(axis); ++l) {
    const std::size_t start = grid_.line_start(axis, l);
    for (std::size_t k = 0; k < n; ++k) line[pad + k] = in[start + k * stride];
    for (std::size_t k = 0; k < pad; ++k) {
      line[k] = line[n + k];             // wrap from the right end
      line[pad + n + k] = line[pad + k];  // wrap from the left end
    }
    for (std::size_t k = 0; k < n; ++k) {
      Complex sum{};
      for (int q = 1; q <= stencil_.order; ++q) {
        sum += stencil_[q] * (line[pad + k + q] - line[pad + k - q]);
      }
      out[start + k * stride] = sum * inv_dx;
    }
  }
}

void StencilGenerator::apply(std::span<const Complex> in, std::span<Complex> out) const {
  std::fill(out.begin(), out.end(), Complex{});
  std::vector<Complex> first(grid_.size());
  for (int axis = 0; axis < grid_.dim(); ++axis) {
    const auto& c = line_values_[axis];
    stencil_sum(in, first, axis);  // ~ d/dx
    if (coeffs_.kind == EquationKind::convection) {
      // c D v = -i c (d/dx) v
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i] * Complex(first[i].imag(), -first[i].real());
    } else {
      // kappa D^2 v = -kappa (d/dx)^2 v
      stencil_sum(first, scratch_, axis);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] -= c[i] * scratch_[i];
    }
  }
}

double StencilGenerator::norm_bound() const {
  double abs_sum = 0.0;
  for (int k = 1; k <= stencil_.order; ++k) abs_sum += 2.0 * std::fabs(stencil_[k]);
  double bound = 0.0;
  for (int axis = 0; axis < grid_.dim(); ++axis) {
    const double d = abs_sum / grid_.spacing(axis);
    bound += sup_[axis] * (coeffs_.kind == EquationKind::convection ? d : d * d);
  }
  return bound;
}

void apply_exponential(const StencilGenerator& generator, std::complex<double> scale,
                       std::span<Complex> v, double theta) {
  const double beta = std::abs(scale) * generator.norm_bound();
  const int substeps = std::max(1, static_cast<int>(std::ceil(beta / theta)));
  const std::complex<double> sub = scale / static_cast<double>(substeps);
  std::vector<Complex> term(v.size());
  std::vector<Complex> next(v.size());
  constexpr int kMaxTerms = 80;
  for (int s = 0; s < substeps; ++s) {
    std::copy(v.begin(), v.end(), term.begin());
    for (int k = 1; k <= kMaxTerms; ++k) {
      generator.apply(term, next);
      const std::complex<double> factor = sub / static_cast<double>(k);
      double term_norm = 0.0;
      double sum_norm = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        term[i] = factor * next[i];
        v[i] += term[i];
        term_norm += std::norm(term[i]);
        sum_norm += std::norm(v[i]);
      }
      if (term_norm <= 1e-36 * sum_norm) break;
    }
  }
}

ReferenceResult reference_evolution(const GridSpec& grid, const CoefficientSet& coeffs, int p,
                                    double horizon, const Field& initial,
                                    const ReferenceOptions& options) {
  if (options.steps < 1) throw Error(ErrorCode::invalid_argument, "reference needs M >= 1");
  if (!(horizon >= 0.0)) throw Error(ErrorCode::invalid_argument, "reference horizon must be >= 0");
  if (!(initial.grid() == grid)) throw Error(ErrorCode::grid_mismatch, "initial field is not on the grid");

  ReferenceBackend backend = options.backend;
  if (backend == ReferenceBackend::automatic) {
    backend = grid.size() <= 256 ? ReferenceBackend::dense : ReferenceBackend::matrix_free;
  }
  if (backend == ReferenceBackend::dense) guard_dense(grid);

  const bool convection = coeffs.kind == EquationKind::convection;
  const double h = horizon / static_cast<double>(options.steps);
  const std::complex<double> scale = convection ? std::complex<double>(0.0, -h) : std::complex<double>(-h, 0.0);

  ReferenceResult result;
  result.backend = backend;
  Field state = initial;
  state.set_time(0.0);
  if (options.record_trajectory) result.trajectory.push_back(state);

  std::optional<StencilGenerator> generator;
  if (backend == ReferenceBackend::matrix_free) {
    check_independent(grid, coeffs, 0.0);
    generator.emplace(grid, coeffs, p);
  }
  std::optional<DenseOperator> cached_step;

  for (int m = 1; m <= options.steps; ++m) {
    const double midpoint = horizon * static_cast<double>(m - 1) / options.steps + 0.5 * h;
    if (backend == ReferenceBackend::matrix_free) {
      generator->set_time(midpoint);
      apply_exponential(*generator, scale, state.amplitudes(), convection ? 2.0 : 1.0);
    } else {
      if (!cached_step || coeffs.time_dependent()) {
        cached_step = matrix_exponential(dense_generator(grid, coeffs, p, midpoint), scale);
      }
      state = cached_step->apply(state);
    }
    state.set_time(horizon * static_cast<double>(m) / options.steps);
    if (options.record_trajectory) result.trajectory.push_back(state);
  }
  result.final_state = std::move(state);
  return result;
}

namespace {

Field apply_mode_multiplier(const Field& initial, const std::vector<DerivativeSymbol>& symbols,
                            const std::function<Complex(std::span<const double>)>& multiplier,
                            double horizon) {
  const GridSpec& grid = initial.grid();
  Field out = initial;
  for (int axis = 0; axis < grid.dim(); ++axis) axis_fourier_inplace(out.amplitudes(), grid, axis, FourierDirection::forward);
  std::array<std::size_t, 3> index{};
  std::array<double, 3> d{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    grid.unravel(i, std::span<std::size_t>(index.data(), grid.dim()));
    for (int axis = 0; axis < grid.dim(); ++axis) d[axis] = symbols[axis][index[axis]];
    out[i] *= multiplier(std::span<const double>(d.data(), grid.dim()));
  }
  for (int axis = 0; axis < grid.dim(); ++axis) axis_fourier_inplace(out.amplitudes(), grid, axis, FourierDirection::inverse);
  out.set_time(initial.time() + horizon);
  return out;
}

std::vector<DerivativeSymbol> symbols_for(const GridSpec& grid, int p) {
  const auto stencil = stencil_coefficients(p);
  std::vector<DerivativeSymbol> symbols;
  for (int axis = 0; axis < grid.dim(); ++axis) symbols.push_back(derivative_symbol(stencil, grid.qubits(axis)));
  return symbols;
}

}  // namespace

Field analytic_constant_convection(const Field& initial, std::span<const double> velocity, int p,
                                   double horizon) {
  const GridSpec& grid = initial.grid();
  if (static_cast<int>(velocity.size()) != grid.dim()) throw Error(ErrorCode::invalid_argument, "velocity has wrong dimension");
  return apply_mode_multiplier(initial, symbols_for(grid, p), [&](std::span<const double> d) {
    double phase = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) phase += velocity[j] * d[j];
    return std::polar(1.0, -horizon * phase);
  }, horizon);
}

Field analytic_constant_diffusion(const Field& initial, std::span<const double> conductivity,
                                  int p, double horizon) {
  const GridSpec& grid = initial.grid();
  if (static_cast<int>(conductivity.size()) != grid.dim()) throw Error(ErrorCode::invalid_argument, "conductivity has wrong dimension");
  for (double k : conductivity) {
    if (k < 0.0) throw Error(ErrorCode::invalid_coefficient, "negative conductivity");
  }
  return apply_mode_multiplier(initial, symbols_for(grid, p), [&](std::span<const double> d) {
    double rate = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) rate += conductivity[j] * d[j] * d[j];
    return Complex(std::exp(-horizon * rate), 0.0);
  }, horizon);
}

}  // namespace qsplit
