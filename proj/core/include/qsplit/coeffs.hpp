#pragma once

// Coefficient fields c_j(x, t) / kappa_j(x, t) and the numerical functionals
// the error analysis needs from them.

#include <span>
#include <string>
#include <vector>

#include "qsplit/expr.hpp"
#include "qsplit/grid.hpp"

namespace qsplit {

enum class EquationKind { convection, diffusion };

const char* to_string(EquationKind kind);

struct CoefficientSet {
  EquationKind kind = EquationKind::convection;
  std::vector<Expr> exprs;  ///< one per axis

  int dim() const { return static_cast<int>(exprs.size()); }
  const Expr& operator[](int axis) const { return exprs[static_cast<std::size_t>(axis)]; }
  bool time_dependent() const;

  static CoefficientSet parse(EquationKind kind, const std::vector<std::string>& texts, int dimension);
};

struct TimeWindow {
  double t0 = 0.0;
  double t1 = 0.0;
};

/// Equispaced sample times covering the window; a degenerate window gives {t0}.
std::vector<double> sample_times(TimeWindow window, int count = 33);

struct AxisIndependence {
  int axis = 0;
  bool passed = true;
  double max_variation = 0.0;
  std::vector<double> worst_point;
  double worst_time = 0.0;
};

struct IndependenceReport {
  bool passed = true;
  std::vector<AxisIndependence> axes;
  std::string summary() const;
};

inline constexpr double kIndependenceTolerance = 1e-10;

/// For each axis j, max over lines along j of (max - min) of e_j along the
/// line, at each sample time. Passes iff every variation is < 1e-10.
IndependenceReport validate_independence(const CoefficientSet& set, const GridSpec& grid,
                                         std::span<const double> times);

/// Smallest sampled value over the oversampled grid and window.
double min_value(const Expr& expr, const GridSpec& grid, TimeWindow window, int oversample = 1);

/// max |expr| over the grid refined `oversample` times per axis and at least
/// 33 equispaced times. A lower bound on the true sup-norm.
double sup_norm(const Expr& expr, const GridSpec& grid, TimeWindow window, int oversample = 4);

/// Sup-norm of the order-th spatial derivative along `axis`, by central
/// differences with step 2^{-(n_axis + 4)} and one Richardson extrapolation.
double partial_sup_norm(const Expr& expr, int axis, int order, const GridSpec& grid,
                        TimeWindow window, int oversample = 4);

/// Sup-norm of the time derivative, central differences with step 2^{-12}
/// and one Richardson extrapolation.
double time_partial_sup_norm(const Expr& expr, const GridSpec& grid, TimeWindow window,
                             int oversample = 4);

/// 4-point Gauss-Legendre integral of expr(point, s) over [t0, t1].
/// Expressions free of t integrate exactly as (t1 - t0) * value.
double time_integral(const Expr& expr, std::span<const double> point, double t0, double t1);

}  // namespace qsplit
