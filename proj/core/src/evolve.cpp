#include "qsplit/evolve.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <string>

#include "qsplit/error.hpp"

namespace qsplit {

const char* to_string(ProductFormula formula) {
  return formula == ProductFormula::standard ? "standard" : "generalized";
}

void EvolutionPlan::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::invalid_argument, "horizon T must be positive");
  }
  if (steps < 1) throw Error(ErrorCode::invalid_argument, "step count L must be >= 1");
  if (coeffs.dim() != grid.dim()) {
    throw Error(ErrorCode::invalid_argument, "coefficient count does not match the grid dimension");
  }
  if (coeffs.kind != kind) throw Error(ErrorCode::invalid_argument, "coefficient kind does not match the plan");
  (void)stencil_coefficients(order);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    if (grid.points(axis) <= static_cast<std::size_t>(2 * order)) {
      throw Error(ErrorCode::grid_too_coarse, "axis " + std::to_string(axis + 1) +
                                                  " has too few points for stencil order " +
                                                  std::to_string(order));
    }
  }
  const auto times = sample_times({0.0, horizon});
  const auto independence = validate_independence(coeffs, grid, times);
  if (!independence.passed) throw Error(ErrorCode::invalid_coefficient, independence.summary());
  if (kind == EquationKind::diffusion) {
    for (int axis = 0; axis < grid.dim(); ++axis) {
      if (min_value(coeffs[axis], grid, {0.0, horizon}) < 0.0) {
        throw Error(ErrorCode::invalid_coefficient,
                    "diffusion coefficient for axis " + std::to_string(axis + 1) + " is negative");
      }
    }
  }
}

void axis_phase_substep_inplace(Field& field, int axis, std::span<const double> weights,
                                SubstepMode mode) {
  const GridSpec& grid = field.grid();
  if (axis < 0 || axis >= grid.dim()) throw Error(ErrorCode::invalid_argument, "axis out of range");
  if (weights.size() != grid.size()) throw Error(ErrorCode::invalid_argument, "weights do not cover the grid");
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::invalid_argument, "non-finite substep weight");
  }
  auto amps = field.amplitudes();
  axis_fourier_inplace(amps, grid, axis, FourierDirection::forward);
  if (mode == SubstepMode::phase) {
    for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= std::polar(1.0, -weights[i]);
  } else {
    for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= std::exp(-weights[i]);
  }
  axis_fourier_inplace(amps, grid, axis, FourierDirection::inverse);
}

Field axis_phase_substep(const Field& field, int axis, std::span<const double> weights,
                         SubstepMode mode) {
  Field out = field;
  axis_phase_substep_inplace(out, axis, weights, mode);
  return out;
}

std::vector<double> step_weights(const EvolutionPlan& plan, const DerivativeSymbol& symbol,
                                 int axis, double t, double h) {
  const GridSpec& grid = plan.grid;
  const Expr& coefficient = plan.coeffs[axis];
  const std::size_t n = grid.points(axis);
  const std::size_t stride = grid.stride(axis);
  if (symbol.size() != n) throw Error(ErrorCode::invalid_argument, "symbol does not match the axis");

  std::vector<double> weights(grid.size());
  std::array<double, 3> x{};
  const std::span<double> coords(x.data(), static_cast<std::size_t>(grid.dim()));
  for (std::size_t line = 0; line < grid.lines(axis); ++line) {
    const std::size_t start = grid.line_start(axis, line);
    // own-axis coordinate is irrelevant by the independence assumption
    grid.coordinates(start, coords);
    double scale = 0.0;
    if (plan.formula == ProductFormula::standard || !coefficient.depends_on_time()) {
      scale = h * coefficient.evaluate(coords, t + h);
    } else {
      scale = time_integral(coefficient, coords, t, t + h);
    }
    if (plan.kind == EquationKind::diffusion && scale < 0.0) {
      throw Error(ErrorCode::invalid_coefficient,
                  "negative diffusion coefficient sample on axis " + std::to_string(axis + 1));
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double d = symbol[k];
      weights[start + k * stride] = plan.kind == EquationKind::convection ? scale * d : scale * d * d;
    }
  }
  return weights;
}

namespace {

class SplitStepper {
 public:
  explicit SplitStepper(const EvolutionPlan& plan) : plan_(plan) {
    const auto stencil = stencil_coefficients(plan.order);
    for (int axis = 0; axis < plan.grid.dim(); ++axis) {
      symbols_.push_back(derivative_symbol(stencil, plan.grid.qubits(axis)));
    }
  }

  void step(Field& field, double t, double h) {
    const SubstepMode mode =
        plan_.kind == EquationKind::convection ? SubstepMode::phase : SubstepMode::damping;
    for (int axis = 0; axis < plan_.grid.dim(); ++axis) {
      const auto weights = step_weights(plan_, symbols_[axis], axis, t, h);
      axis_phase_substep_inplace(field, axis, weights, mode);
      ++substeps_;
    }
    field.set_time(t + h);
  }

  std::size_t substeps() const { return substeps_; }

 private:
  const EvolutionPlan& plan_;
  std::vector<DerivativeSymbol> symbols_;
  std::size_t substeps_ = 0;
};

void check_field(const Field& field, const EvolutionPlan& plan) {
  if (!(field.grid() == plan.grid)) throw Error(ErrorCode::grid_mismatch, "field is not on the plan grid");
}

}  // namespace

Field convection_step(const Field& field, double t, double h, const EvolutionPlan& plan) {
  if (plan.kind != EquationKind::convection) {
    throw Error(ErrorCode::invalid_argument, "convection_step needs a convection plan");
  }
  check_field(field, plan);
  Field out = field;
  SplitStepper(plan).step(out, t, h);
  return out;
}

Field diffusion_step(const Field& field, double t, double h, const EvolutionPlan& plan) {
  if (plan.kind != EquationKind::diffusion) {
    throw Error(ErrorCode::invalid_argument, "diffusion_step needs a diffusion plan");
  }
  check_field(field, plan);
  Field out = field;
  SplitStepper(plan).step(out, t, h);
  return out;
}

EvolutionResult evolve(const EvolutionPlan& plan, const Field& initial) {
  check_field(initial, plan);
  if (plan.steps < 1 || !(plan.horizon > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "evolve needs L >= 1 and T > 0");
  }
  const auto started = std::chrono::steady_clock::now();
  SplitStepper stepper(plan);
  EvolutionResult result;
  Field state = initial;
  state.set_time(0.0);
  if (plan.record_trajectory) {
    result.trajectory.reserve(static_cast<std::size_t>(plan.steps) + 1);
    result.trajectory.push_back(state);
  }
  const double h = plan.step_size();
  result.report.norms.reserve(static_cast<std::size_t>(plan.steps));
  for (int l = 1; l <= plan.steps; ++l) {
    const double t = plan.horizon * static_cast<double>(l - 1) / static_cast<double>(plan.steps);
    stepper.step(state, t, h);
    state.set_time(plan.horizon * static_cast<double>(l) / static_cast<double>(plan.steps));
    result.report.norms.push_back(scaled_norm(state));
    if (plan.record_trajectory) result.trajectory.push_back(state);
  }
  result.report.substeps = stepper.substeps();
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.final_state = std::move(state);
  return result;
}

}  // namespace qsplit
