#include "qsplit/analysis.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "qsplit/error.hpp"

namespace qsplit {

namespace {

/// Runs fn(i) for i in [0, count) on up to `threads` workers; rethrows the
/// first failure in index order.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> failures(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(count, static_cast<std::size_t>(threads));
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

bool is_constant(const Expr& e) {
  return !e.uses(Variable::x1) && !e.uses(Variable::x2) && !e.uses(Variable::x3) && !e.depends_on_time();
}

double evaluate_constant(const Expr& e) {
  const std::array<double, 3> origin{};
  return e.evaluate(std::span<const double>(origin.data(), static_cast<std::size_t>(e.dimension())), 0.0);
}

std::string describe(const Problem& problem, const std::vector<int>& qubits) {
  std::ostringstream os;
  os << to_string(problem.kind) << " " << to_string(problem.formula) << " p=" << problem.order << " n=(";
  for (std::size_t i = 0; i < qubits.size(); ++i) os << (i ? "," : "") << qubits[i];
  os << ") T=" << problem.horizon;
  return os.str();
}

}  // namespace

EvolutionPlan Problem::plan(const std::vector<int>& grid_qubits, int steps_override) const {
  EvolutionPlan p;
  p.kind = kind;
  p.formula = formula;
  p.order = order;
  p.grid = GridSpec(grid_qubits);
  p.coeffs = coeffs;
  p.horizon = horizon;
  p.steps = steps_override;
  return p;
}

Field Problem::initial_state(const GridSpec& grid) const {
  return normalize(sample_function(grid, initial, 0.0));
}

OrderFit order_fit(const ErrorCurve& curve, double floor) {
  OrderFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& point : curve.points) {
    if (!(point.error > 10.0 * floor) || !(point.parameter > 0.0)) {
      fit.excluded.push_back(point.parameter);
      continue;
    }
    xs.push_back(std::log(point.parameter));
    ys.push_back(std::log(point.error));
  }
  if (xs.size() < 3) {
    std::ostringstream os;
    os << "order fit needs 3 points above the roundoff floor, have " << xs.size() << "; excluded:";
    for (double e : fit.excluded) os << " " << e;
    throw Error(ErrorCode::degenerate_fit, os.str());
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::degenerate_fit, "order fit needs distinct abscissae");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

TrotterScan trotter_error_scan(const Problem& problem, const std::vector<int>& steps,
                               const ScanOptions& options) {
  if (steps.empty()) throw Error(ErrorCode::invalid_argument, "trotter scan needs at least one L");
  const EvolutionPlan base = problem.plan(problem.qubits, steps.front());
  base.validate();
  const Field initial = problem.initial_state(base.grid);
  const bool diffusion = problem.kind == EquationKind::diffusion;

  TrotterScan scan;
  ReferenceOptions fine_options{2 * options.reference_steps, ReferenceBackend::matrix_free, true};
  ReferenceOptions coarse_options{options.reference_steps, ReferenceBackend::matrix_free, true};
  std::array<ReferenceResult*, 2> targets{&scan.coarse_reference, &scan.reference};
  std::array<ReferenceOptions, 2> reference_options{coarse_options, fine_options};
  const std::size_t references = options.check_reference ? 2 : 1;
  parallel_for(references, options.threads, [&](std::size_t i) {
    const std::size_t slot = references == 2 ? i : 1;
    *targets[slot] = reference_evolution(base.grid, problem.coeffs, problem.order, problem.horizon,
                                         initial, reference_options[slot]);
  });
  if (options.check_reference) {
    scan.reference_shift =
        distance(scan.coarse_reference.final_state, scan.reference.final_state, diffusion);
  }

  std::vector<double> errors(steps.size());
  std::vector<double> coarse_errors(steps.size());
  parallel_for(steps.size(), options.threads, [&](std::size_t i) {
    EvolutionPlan plan = base;
    plan.steps = steps[i];
    const Field final_state = evolve(plan, initial).final_state;
    errors[i] = distance(final_state, scan.reference.final_state, diffusion);
    if (options.check_reference) {
      coarse_errors[i] = distance(final_state, scan.coarse_reference.final_state, diffusion);
    }
  });

  scan.curve.abscissa = "L";
  scan.curve.metadata = describe(problem, problem.qubits);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (options.check_reference && errors[i] > 10.0 * kRoundoffFloor &&
        std::fabs(coarse_errors[i] - errors[i]) > 0.01 * errors[i]) {
      std::ostringstream os;
      os << "reference not converged: E(L=" << steps[i] << ") moved from " << coarse_errors[i]
         << " to " << errors[i] << " when doubling M";
      throw Error(ErrorCode::reference_not_converged, os.str());
    }
    scan.curve.points.push_back({static_cast<double>(steps[i]), errors[i]});
  }
  return scan;
}

BoundPrefactors bound_prefactors(const EvolutionPlan& plan, const std::vector<Field>& trajectory) {
  if (trajectory.size() < 33) {
    throw Error(ErrorCode::invalid_argument, "bound prefactors need at least 33 trajectory snapshots");
  }
  const GridSpec& grid = trajectory.front().grid();
  const int d = grid.dim();
  const bool diffusion = plan.kind == EquationKind::diffusion;
  const int q = diffusion ? 2 : 1;
  const TimeWindow window{0.0, plan.horizon};

  BoundPrefactors out;
  out.kind = plan.kind;
  out.snapshots = static_cast<int>(trajectory.size());

  // max_t ||d^q_{x_m} f_t|| over the snapshots
  std::vector<double> derivative_norm(d, 0.0);
  for (const auto& snapshot : trajectory) {
    for (int m = 0; m < d; ++m) {
      derivative_norm[m] = std::max(derivative_norm[m], scaled_norm(spectral_derivative(snapshot, m, q)));
    }
  }
  const double denominator = diffusion ? scaled_norm(trajectory.back()) : scaled_norm(trajectory.front());
  if (!(denominator > 0.0)) throw Error(ErrorCode::degenerate_state, "zero state in bound prefactors");
  std::vector<double> ratio(d);
  for (int m = 0; m < d; ++m) ratio[m] = derivative_norm[m] / denominator;

  const std::string sym = diffusion ? "kappa" : "c";
  std::vector<double> sup(d);
  std::vector<double> dt_sup(d);
  for (int j = 0; j < d; ++j) {
    sup[j] = sup_norm(plan.coeffs[j], grid, window);
    dt_sup[j] = time_partial_sup_norm(plan.coeffs[j], grid, window);
    out.ingredients.push_back({"sup|" + sym + std::to_string(j + 1) + "|", sup[j]});
    out.ingredients.push_back({"sup|dt " + sym + std::to_string(j + 1) + "|", dt_sup[j]});
    out.ingredients.push_back({"max_t ||d^" + std::to_string(q) + "_x" + std::to_string(j + 1) +
                                   " f_t|| / denominator",
                               ratio[j]});
  }
  out.ingredients.push_back({diffusion ? "||phi_T||" : "||f_0||", denominator});

  auto assemble = [&](const std::vector<double>& r, double& a_g, double& a_s) {
    a_g = 0.0;
    for (int j = 0; j < d; ++j) {
      for (int m = j + 1; m < d; ++m) {
        const double djm = partial_sup_norm(plan.coeffs[m], j, q, grid, window);
        const double dmj = partial_sup_norm(plan.coeffs[j], m, q, grid, window);
        a_g += 0.5 * (sup[j] * djm * r[m] + sup[m] * dmj * r[j]);
      }
    }
    a_s = a_g;
    for (int j = 0; j < d; ++j) a_s += 0.5 * dt_sup[j] * r[j];
  };
  assemble(ratio, out.a_g, out.a_s);
  for (int j = 0; j < d; ++j) {
    for (int m = 0; m < d; ++m) {
      if (m == j) continue;
      out.ingredients.push_back({"sup|d^" + std::to_string(q) + "_x" + std::to_string(j + 1) + " " + sym +
                                     std::to_string(m + 1) + "|",
                                 partial_sup_norm(plan.coeffs[m], j, q, grid, window)});
    }
  }

  if (diffusion) {
    Complex sum{};
    for (const auto& a : trajectory.front().amplitudes()) sum += a;
    const double mean = std::abs(sum) / static_cast<double>(trajectory.front().size());
    out.ingredients.push_back({"|mean(phi_0)|", mean});
    if (mean > 1e-12 * scaled_norm(trajectory.front())) {
      std::vector<double> r(d);
      for (int m = 0; m < d; ++m) r[m] = derivative_norm[m] / mean;
      double a_g = 0.0;
      double a_s = 0.0;
      assemble(r, a_g, a_s);
      out.a_g_mean_bound = a_g;
      out.a_s_mean_bound = a_s;
    } else {
      out.warnings.push_back(
          "mean(phi_0) = 0: the mean-based lower bound on ||phi_T|| is unavailable; using ||phi_T|| directly");
    }
  }
  return out;
}

BoundPrefactors checked_bound_prefactors(const Problem& problem, const TrotterScan& scan) {
  const EvolutionPlan plan = problem.plan(problem.qubits, problem.steps);
  BoundPrefactors fine = bound_prefactors(plan, scan.reference.trajectory);
  if (!scan.coarse_reference.trajectory.empty()) {
    const BoundPrefactors coarse = bound_prefactors(plan, scan.coarse_reference.trajectory);
    auto moved = [](double a, double b) { return std::fabs(a - b) > 0.01 * std::max(std::fabs(a), std::fabs(b)); };
    if (moved(fine.a_g, coarse.a_g) || moved(fine.a_s, coarse.a_s)) {
      std::ostringstream os;
      os << "bound prefactors changed by more than 1% when doubling snapshots (a_g " << coarse.a_g
         << " -> " << fine.a_g << ", a_s " << coarse.a_s << " -> " << fine.a_s << ")";
      throw Error(ErrorCode::reference_not_converged, os.str());
    }
  }
  return fine;
}

const char* to_string(BoundCheck::Status status) {
  switch (status) {
    case BoundCheck::Status::satisfied: return "satisfied";
    case BoundCheck::Status::violated: return "violated";
    case BoundCheck::Status::remainder_dominated: return "remainder-dominated";
  }
  return "?";
}

BoundCheck verify_bound(const ErrorCurve& curve, const BoundPrefactors& prefactors, double horizon,
                        ProductFormula formula) {
  if (curve.points.empty()) throw Error(ErrorCode::invalid_argument, "empty error curve");
  BoundCheck check;
  check.prefactor = formula == ProductFormula::standard ? prefactors.a_s : prefactors.a_g;
  const auto& last = curve.points.back();
  check.largest_steps = last.parameter;
  check.measured = last.error * last.parameter / (horizon * horizon);

  const bool all_floor = std::all_of(curve.points.begin(), curve.points.end(),
                                     [](const CurvePoint& p) { return p.error <= 10.0 * kRoundoffFloor; });
  if (all_floor) {
    check.status = BoundCheck::Status::satisfied;
    check.tightness = 0.0;
    check.notice = "errors at the roundoff floor; bound trivially satisfied";
    return check;
  }
  if (!(check.prefactor > 0.0)) {
    check.status = BoundCheck::Status::remainder_dominated;
    check.notice = "a_alpha = 0 with nonzero error: higher-order remainder dominates, bound check skipped";
    return check;
  }
  if (curve.points.size() < 2) throw Error(ErrorCode::regime_not_reached, "need two points to assess the regime");
  const auto& previous = curve.points[curve.points.size() - 2];
  const double predicted = previous.parameter / last.parameter;
  const double observed = last.error / previous.error;
  if (std::fabs(observed / predicted - 1.0) > 0.1) {
    std::ostringstream os;
    os << "largest L not in the first-order regime: E ratio " << observed << " vs predicted " << predicted;
    throw Error(ErrorCode::regime_not_reached, os.str());
  }
  check.tightness = check.measured / check.prefactor;
  check.status = check.tightness <= 1.0 + kBoundSlack ? BoundCheck::Status::satisfied
                                                       : BoundCheck::Status::violated;
  return check;
}

double operator_norm_bound(const EvolutionPlan& plan) {
  const auto stencil = stencil_coefficients(plan.order);
  const int d = plan.grid.dim();
  std::vector<double> norms(d);
  for (int j = 0; j < d; ++j) {
    const double dmax = derivative_symbol(stencil, plan.grid.qubits(j)).max_abs();
    const double c = sup_norm(plan.coeffs[j], plan.grid, {0.0, plan.horizon});
    norms[j] = c * (plan.kind == EquationKind::convection ? dmax : dmax * dmax);
  }
  double pairs = 0.0;
  for (int j = 0; j < d; ++j) {
    for (int m = j + 1; m < d; ++m) pairs += 2.0 * norms[j] * norms[m];
  }
  return 0.5 * plan.horizon * plan.horizon / static_cast<double>(plan.steps) * pairs;
}

ScalingReport resolution_scan(const Problem& problem, const std::vector<int>& ns, int steps,
                              const ScanOptions& options) {
  if (ns.empty()) throw Error(ErrorCode::invalid_argument, "resolution scan needs at least one n");
  ScalingReport report;
  report.kind = problem.kind;
  report.formula = problem.formula;
  report.horizon = problem.horizon;
  for (int n : ns) {
    Problem at_n = problem;
    at_n.qubits.assign(static_cast<std::size_t>(problem.dim()), n);
    at_n.steps = steps;
    const TrotterScan scan = trotter_error_scan(at_n, {steps}, options);
    const BoundPrefactors prefactors = checked_bound_prefactors(at_n, scan);

    ScalingRow row;
    row.qubits = at_n.qubits;
    row.steps = steps;
    row.error = scan.curve.points.front().error;
    row.prefactor = static_cast<double>(steps) * row.error;
    row.a_alpha = problem.formula == ProductFormula::standard ? prefactors.a_s : prefactors.a_g;
    row.bound_vector = row.a_alpha * problem.horizon * problem.horizon / static_cast<double>(steps);
    row.bound_operator = operator_norm_bound(at_n.plan(at_n.qubits, steps));
    if (!report.rows.empty() && report.rows.back().bound_operator > 0.0) {
      row.operator_norm_growth = row.bound_operator / report.rows.back().bound_operator;
    }
    report.rows.push_back(std::move(row));
  }
  double lo = report.rows.front().prefactor;
  double hi = lo;
  for (const auto& row : report.rows) lo = std::min(lo, row.prefactor), hi = std::max(hi, row.prefactor);
  report.prefactor_spread = lo > 0.0 ? hi / lo : 0.0;
  bool first = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const double g = report.rows[i].operator_norm_growth;
    if (first) report.min_operator_growth = report.max_operator_growth = g, first = false;
    report.min_operator_growth = std::min(report.min_operator_growth, g);
    report.max_operator_growth = std::max(report.max_operator_growth, g);
  }
  return report;
}

ConvergenceResult spatial_convergence(const Problem& problem, const std::vector<int>& ns) {
  for (const auto& e : problem.coeffs.exprs) {
    if (!is_constant(e)) {
      throw Error(ErrorCode::invalid_argument,
                  "spatial convergence needs constant coefficients (closed-form PDE solution)");
    }
  }
  const int d = problem.dim();
  std::vector<double> constants(d);
  for (int j = 0; j < d; ++j) constants[j] = evaluate_constant(problem.coeffs[j]);
  double coefficient_sum = 0.0;
  for (double c : constants) coefficient_sum += std::fabs(c);
  const bool diffusion = problem.kind == EquationKind::diffusion;

  ConvergenceResult result;
  result.curve.abscissa = "dx";
  result.curve.metadata = describe(problem, problem.qubits);
  for (int n : ns) {
    const GridSpec grid(std::vector<int>(static_cast<std::size_t>(d), n));
    const Field sampled = sample_function(grid, problem.initial, 0.0);
    const double scale = scaled_norm(sampled);
    if (!(scale > 0.0)) throw Error(ErrorCode::degenerate_state, "zero initial condition");

    Field computed = diffusion
                         ? analytic_constant_diffusion(sampled, constants, problem.order, problem.horizon)
                         : analytic_constant_convection(sampled, constants, problem.order, problem.horizon);
    Field exact = Field::zeros(grid, problem.horizon);
    if (!diffusion) {
      std::array<double, 3> x{};
      for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.coordinates(i, std::span<double>(x.data(), d));
        for (int j = 0; j < d; ++j) {
          const double moved = x[j] - constants[j] * problem.horizon;
          x[j] = moved - std::floor(moved);
        }
        exact[i] = problem.initial.evaluate(std::span<const double>(x.data(), d), 0.0);
      }
    } else {
      // exact heat semigroup applied to the trigonometric interpolant on a finer grid
      int fine_n = n + 3;
      while (fine_n * d > 22 && fine_n > n) --fine_n;
      const GridSpec fine(std::vector<int>(static_cast<std::size_t>(d), fine_n));
      Field spectral = sample_function(fine, problem.initial, 0.0);
      for (int j = 0; j < d; ++j) axis_fourier_inplace(spectral.amplitudes(), fine, j, FourierDirection::forward);
      std::array<std::size_t, 3> index{};
      for (std::size_t i = 0; i < fine.size(); ++i) {
        fine.unravel(i, std::span<std::size_t>(index.data(), d));
        double rate = 0.0;
        for (int j = 0; j < d; ++j) {
          const double omega = 2.0 * std::numbers::pi * static_cast<double>(signed_frequency(index[j], fine.points(j)));
          rate += constants[j] * omega * omega;
        }
        spectral[i] *= std::exp(-problem.horizon * rate);
      }
      for (int j = 0; j < d; ++j) axis_fourier_inplace(spectral.amplitudes(), fine, j, FourierDirection::inverse);
      const int shift = fine_n - n;
      std::array<std::size_t, 3> fine_index{};
      for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.unravel(i, std::span<std::size_t>(index.data(), d));
        for (int j = 0; j < d; ++j) fine_index[j] = index[j] << shift;
        exact[i] = spectral[fine.ravel(std::span<const std::size_t>(fine_index.data(), d))];
      }
    }
    double error = 0.0;
    if (diffusion) {
      error = distance(computed, exact, true);
    } else {
      for (auto& a : computed.amplitudes()) a /= scale;
      for (auto& a : exact.amplitudes()) a /= scale;
      error = distance(computed, exact, false);
    }
    const double dx = grid.spacing(0);
    result.curve.points.push_back({dx, error});
    const double model = problem.horizon * coefficient_sum * std::pow(dx, 2 * problem.order);
    if (model > 0.0 && error > 10.0 * kRoundoffFloor) {
      result.empirical_constant = std::max(result.empirical_constant, error / model);
    }
  }
  std::sort(result.curve.points.begin(), result.curve.points.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.parameter < b.parameter; });
  result.fit = order_fit(result.curve);
  return result;
}

QubitBudget qubit_budget(double epsilon, double horizon, int p, const std::vector<double>& sup_norms,
                         double constant) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::invalid_argument, "epsilon must be positive");
  if (!(constant > 0.0)) throw Error(ErrorCode::invalid_argument, "constant K must be positive");
  if (p < 1) throw Error(ErrorCode::invalid_argument, "stencil order must be >= 1");
  QubitBudget budget;
  for (double c : sup_norms) {
    const double argument = horizon * constant * c / epsilon;
    if (!(argument > 1.0)) {
      budget.qubits.push_back(0);
      budget.degenerate.push_back(true);
      continue;
    }
    budget.qubits.push_back(static_cast<int>(std::ceil(std::log2(argument) / (2.0 * p))));
    budget.degenerate.push_back(false);
  }
  return budget;
}

namespace {

void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

}  // namespace

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows, int dimension) {
  std::string text = "experiment,kind,formula,p,";
  for (int j = 0; j < dimension; ++j) text += "n" + std::to_string(j + 1) + ",";
  text += "L,T,error,bound_vector,bound_operator,prefactor,slope,r2\n";
  for (const auto& row : rows) {
    text += row.experiment + "," + to_string(row.kind) + "," + to_string(row.formula) + "," +
            std::to_string(row.p) + ",";
    for (int j = 0; j < dimension; ++j) {
      text += (j < static_cast<int>(row.qubits.size()) ? std::to_string(row.qubits[j]) : "") + ",";
    }
    text += std::to_string(row.steps) + ",";
    for (double v : {row.horizon, row.error, row.bound_vector, row.bound_operator, row.prefactor, row.slope}) {
      append_number(text, v);
      text += ',';
    }
    append_number(text, row.r2);
    text += '\n';
  }
  out << text;
}

}  // namespace qsplit
