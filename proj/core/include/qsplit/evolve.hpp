#pragma once

// First-order product-formula evolution. Each factor exp(-i h c_j D_j) or
// exp(-h kappa_j D_j^2) is diagonal in the mixed basis (Fourier along axis j,
// position along the others), so one factor costs two per-axis DFTs and a
// pointwise multiply.

#include <span>
#include <vector>

#include "qsplit/coeffs.hpp"
#include "qsplit/field.hpp"
#include "qsplit/stencil.hpp"

namespace qsplit {

enum class ProductFormula { standard, generalized };

const char* to_string(ProductFormula formula);

struct EvolutionPlan {
  EquationKind kind = EquationKind::convection;
  ProductFormula formula = ProductFormula::standard;
  int order = 1;  ///< stencil order p
  GridSpec grid;
  CoefficientSet coeffs;
  double horizon = 1.0;  ///< T
  int steps = 1;         ///< L
  bool record_trajectory = false;

  double step_size() const { return horizon / static_cast<double>(steps); }

  /// Checks the plan invariants: positive step, stencil fits every axis,
  /// coefficient dimension/kind match, coefficient independence of own axis,
  /// and kappa >= 0 for diffusion. Throws invalid_argument, grid_too_coarse or
  /// invalid_coefficient.
  void validate() const;
};

enum class SubstepMode { phase, damping };

/// inverse-DFT_j( m .* DFT_j(field) ) with m = exp(-i w) (phase) or exp(-w)
/// (damping). `weights` has one entry per grid point in the mixed basis.
Field axis_phase_substep(const Field& field, int axis, std::span<const double> weights,
                         SubstepMode mode);
void axis_phase_substep_inplace(Field& field, int axis, std::span<const double> weights,
                                SubstepMode mode);

/// Mixed-basis weights of the axis-`axis` factor for the step [t, t+h]:
/// w(k_j, x_other) = s_j(x_other) * d(k_j)^q with q = 1 (convection) or 2
/// (diffusion), s_j = h * e_j(x_other, t+h) for the standard formula or the
/// time integral of e_j over [t, t+h] for the generalized one.
std::vector<double> step_weights(const EvolutionPlan& plan, const DerivativeSymbol& symbol,
                                 int axis, double t, double h);

/// Applies the axis factors for j = 1, ..., d in that order.
Field convection_step(const Field& field, double t, double h, const EvolutionPlan& plan);
Field diffusion_step(const Field& field, double t, double h, const EvolutionPlan& plan);

struct StepReport {
  std::vector<double> norms;  ///< scaled norm after each step
  double wall_seconds = 0.0;
  std::size_t substeps = 0;
};

struct EvolutionResult {
  Field final_state;
  std::vector<Field> trajectory;  ///< L+1 fields when recorded
  StepReport report;
};

/// L steps over [(l-1)T/L, lT/L], l = 1 first. Final timestamp is T.
EvolutionResult evolve(const EvolutionPlan& plan, const Field& initial);

}  // namespace qsplit
