#include "qsplit_cli/runner.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

#include "qsplit/version.hpp"
#include "qsplit/walsh.hpp"

namespace qsplit::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::invalid_argument, "write failed for " + path.string());
}

void write_field(const fs::path& path, const Field& field) {
  std::ostringstream os;
  write_field_csv(os, field);
  write_file(path, os.str());
}

void write_rows(const fs::path& path, const std::vector<ReportRow>& rows, int d) {
  std::ostringstream os;
  write_report_csv(os, rows, d);
  write_file(path, os.str());
}

std::string number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

ReportRow base_row(const RunConfig& c, const char* experiment) {
  ReportRow row;
  row.experiment = experiment;
  row.kind = c.equation;
  row.formula = c.formula;
  row.p = c.p;
  row.qubits = c.n;
  row.steps = c.L;
  row.horizon = c.T;
  return row;
}

json fit_json(const OrderFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}, {"excluded", fit.excluded}};
}

json curve_json(const ErrorCurve& curve) {
  json points = json::array();
  for (const auto& p : curve.points) points.push_back({{"parameter", p.parameter}, {"error", p.error}});
  return {{"abscissa", curve.abscissa}, {"metadata", curve.metadata}, {"points", points}};
}

json prefactors_json(const BoundPrefactors& pf) {
  json ingredients = json::array();
  for (const auto& i : pf.ingredients) ingredients.push_back({{"name", i.name}, {"value", i.value}});
  json out = {{"kind", to_string(pf.kind)}, {"a_g", pf.a_g}, {"a_s", pf.a_s}, {"snapshots", pf.snapshots},
              {"ingredients", ingredients}, {"warnings", pf.warnings}};
  out["a_g_mean_bound"] = pf.a_g_mean_bound ? json(*pf.a_g_mean_bound) : json(nullptr);
  out["a_s_mean_bound"] = pf.a_s_mean_bound ? json(*pf.a_s_mean_bound) : json(nullptr);
  return out;
}

ScanOptions scan_options(const RunConfig& c, const RunOptions& o) {
  ScanOptions s;
  s.reference_steps = c.reference_steps;
  s.threads = std::max(1, o.threads);
  return s;
}

json run_solve(const RunConfig& c, const fs::path& out) {
  const Problem problem = c.problem();
  EvolutionPlan plan = problem.plan(c.n, c.L);
  plan.record_trajectory = c.trajectory;
  plan.validate();
  const Field initial = sample_function(plan.grid, problem.initial, 0.0);
  const auto result = evolve(plan, initial);
  write_field(out / "final_state.csv", result.final_state);
  json files = {"final_state.csv"};
  if (c.trajectory) {
    for (std::size_t l = 0; l < result.trajectory.size(); ++l) {
      const std::string name = "step_" + std::to_string(l) + ".csv";
      write_field(out / name, result.trajectory[l]);
      files.push_back(name);
    }
  }
  json observables = json::array();
  for (const auto& text : c.observables) {
    const Complex v = measure(result.final_state, parse_observable(text, c.d));
    observables.push_back({{"name", text}, {"re", v.real()}, {"im", v.imag()}});
  }
  return {{"files", files},
          {"observables", observables},
          {"initial_scaled_norm", scaled_norm(initial)},
          {"final_scaled_norm", scaled_norm(result.final_state)},
          {"substeps", result.report.substeps},
          {"evolve_seconds", result.report.wall_seconds}};
}

/// Rows for an L-scan, with bound columns from the recorded reference.
std::vector<ReportRow> scan_rows(const RunConfig& c, const char* experiment, const TrotterScan& scan,
                                 const OrderFit* fit, const BoundPrefactors& pf) {
  const double a_alpha = c.formula == ProductFormula::standard ? pf.a_s : pf.a_g;
  const Problem problem = c.problem();
  std::vector<ReportRow> rows;
  for (const auto& point : scan.curve.points) {
    ReportRow row = base_row(c, experiment);
    row.steps = static_cast<int>(point.parameter);
    row.error = point.error;
    row.prefactor = point.parameter * point.error;
    row.bound_vector = a_alpha * c.T * c.T / point.parameter;
    row.bound_operator = operator_norm_bound(problem.plan(c.n, row.steps));
    if (fit) row.slope = fit->slope, row.r2 = fit->r2;
    rows.push_back(row);
  }
  return rows;
}

json run_trotter_scan(const RunConfig& c, const RunOptions& o, const fs::path& out) {
  Problem problem = c.problem();
  const auto scan = trotter_error_scan(problem, c.Ls, scan_options(c, o));
  const auto fit = order_fit(scan.curve);
  const auto pf = checked_bound_prefactors(problem, scan);
  write_rows(out / "trotter_scan.csv", scan_rows(c, "trotter-scan", scan, &fit, pf), c.d);
  return {{"files", {"trotter_scan.csv"}},
          {"curve", curve_json(scan.curve)},
          {"fit", fit_json(fit)},
          {"reference_shift", scan.reference_shift},
          {"prefactors", prefactors_json(pf)}};
}

json run_bounds(const RunConfig& c, const RunOptions& o, const fs::path& out) {
  Problem problem = c.problem();
  const auto scan = trotter_error_scan(problem, c.Ls, scan_options(c, o));
  const auto pf = checked_bound_prefactors(problem, scan);
  const auto check = verify_bound(scan.curve, pf, c.T, c.formula);
  write_rows(out / "bounds.csv", scan_rows(c, "bounds", scan, nullptr, pf), c.d);
  return {{"files", {"bounds.csv"}},
          {"curve", curve_json(scan.curve)},
          {"prefactors", prefactors_json(pf)},
          {"check",
           {{"status", to_string(check.status)},
            {"prefactor", check.prefactor},
            {"measured", check.measured},
            {"tightness", check.tightness},
            {"largest_steps", check.largest_steps},
            {"slack", kBoundSlack},
            {"notice", check.notice}}}};
}

json run_resolution_scan(const RunConfig& c, const RunOptions& o, const fs::path& out) {
  const auto report = resolution_scan(c.problem(), c.ns, c.L, scan_options(c, o));
  std::vector<ReportRow> rows;
  json table = json::array();
  for (const auto& r : report.rows) {
    ReportRow row = base_row(c, "resolution-scan");
    row.qubits = r.qubits;
    row.error = r.error;
    row.prefactor = r.prefactor;
    row.bound_vector = r.bound_vector;
    row.bound_operator = r.bound_operator;
    rows.push_back(row);
    table.push_back({{"n", r.qubits},
                     {"error", r.error},
                     {"prefactor", r.prefactor},
                     {"a_alpha", r.a_alpha},
                     {"bound_vector", r.bound_vector},
                     {"bound_operator", r.bound_operator},
                     {"operator_norm_growth", r.operator_norm_growth}});
  }
  write_rows(out / "resolution_scan.csv", rows, c.d);
  return {{"files", {"resolution_scan.csv"}},
          {"rows", table},
          {"prefactor_spread", report.prefactor_spread},
          {"min_operator_growth", report.min_operator_growth},
          {"max_operator_growth", report.max_operator_growth}};
}

json run_convergence(const RunConfig& c, const fs::path& out) {
  const Problem problem = c.problem();
  const auto result = spatial_convergence(problem, c.ns);
  std::vector<ReportRow> rows;
  for (const auto& p : result.curve.points) {
    ReportRow row = base_row(c, "convergence");
    const int n = static_cast<int>(std::lround(-std::log2(p.parameter)));
    row.qubits.assign(static_cast<std::size_t>(c.d), n);
    row.error = p.error;
    row.slope = result.fit.slope;
    row.r2 = result.fit.r2;
    rows.push_back(row);
  }
  write_rows(out / "convergence.csv", rows, c.d);

  std::vector<double> sups;
  const GridSpec grid(c.n);
  for (int j = 0; j < c.d; ++j) sups.push_back(sup_norm(problem.coeffs[j], grid, {0.0, c.T}));
  json budgets = json::array();
  if (result.empirical_constant > 0.0) {
    for (double eps : c.tolerances) {
      const auto b = qubit_budget(eps, c.T, c.p, sups, result.empirical_constant);
      budgets.push_back({{"epsilon", eps}, {"qubits", b.qubits}, {"degenerate", b.degenerate}});
    }
  }
  return {{"files", {"convergence.csv"}},
          {"curve", curve_json(result.curve)},
          {"fit", fit_json(result.fit)},
          {"expected_order", 2 * c.p},
          {"empirical_constant", result.empirical_constant},
          {"qubit_budgets", budgets}};
}

json run_resources(const RunConfig& c, const fs::path& out) {
  EvolutionPlan plan = c.problem().plan(c.n, c.L);
  plan.validate();
  std::string csv = "axis,tolerance,retained_terms,sup_error,rotations,entangling,qft_gates\n";
  json table = json::array();
  for (int axis = 0; axis < c.d; ++axis) {
    for (const auto& row : estimate_step_resources(plan, 0.0, axis, c.tolerances)) {
      csv += std::to_string(axis + 1) + "," + number(row.tolerance) + "," + std::to_string(row.retained_terms) +
             "," + number(row.sup_error) + "," + std::to_string(row.gates.rotations) + "," +
             std::to_string(row.gates.entangling) + "," + std::to_string(row.qft_gates) + "\n";
      table.push_back({{"axis", axis + 1},
                       {"tolerance", row.tolerance},
                       {"retained_terms", row.retained_terms},
                       {"sup_error", row.sup_error},
                       {"rotations", row.gates.rotations},
                       {"entangling", row.gates.entangling},
                       {"qft_gates", row.qft_gates}});
    }
  }
  write_file(out / "resources.csv", csv);
  return {{"files", {"resources.csv"}}, {"rows", table}, {"step_time", 0.0}};
}

json error_json(const std::exception& e, int exit_code) {
  json err = {{"message", e.what()}, {"exit_code", exit_code}};
  if (const auto* q = dynamic_cast<const Error*>(&e)) err["code"] = to_string(q->code());
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) err["violations"] = c->violations();
  return err;
}

json base_report(const json& config_echo) {
  return {{"tool", "qsplit"}, {"version", kVersion}, {"config", config_echo}};
}

}  // namespace

int classify(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return kExitValidation;
  if (const auto* e = dynamic_cast<const Error*>(&error)) {
    if (e->is_numerical_contract()) return kExitNumerical;
    switch (e->code()) {
      case ErrorCode::invalid_argument:
      case ErrorCode::grid_too_coarse:
      case ErrorCode::size_guard:
      case ErrorCode::parse:
      case ErrorCode::evaluation:
      case ErrorCode::invalid_coefficient:
      case ErrorCode::validation:
      case ErrorCode::grid_mismatch:
      case ErrorCode::degenerate_state:
        return kExitValidation;
      default:
        return kExitInternal;
    }
  }
  return kExitInternal;
}

void write_error_report(const fs::path& dir, const json& config_echo, const std::exception& error,
                        int exit_code) {
  json report = base_report(config_echo);
  report["status"] = "error";
  report["error"] = error_json(error, exit_code);
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / "report.json", std::ios::binary | std::ios::trunc);
  if (out) out << report.dump(2) << '\n';
}

RunOutcome run(const RunConfig& config, const RunOptions& options) {
  const fs::path out = options.out.value_or(fs::path(config.output));
  RunOutcome outcome;
  outcome.report = base_report(config.source);
  outcome.report["experiment"] = to_string(config.experiment);
  const Stopwatch total;
  try {
    fs::create_directories(out);
    json result;
    switch (config.experiment) {
      case Experiment::solve: result = run_solve(config, out); break;
      case Experiment::trotter_scan: result = run_trotter_scan(config, options, out); break;
      case Experiment::bounds: result = run_bounds(config, options, out); break;
      case Experiment::resolution_scan: result = run_resolution_scan(config, options, out); break;
      case Experiment::convergence: result = run_convergence(config, out); break;
      case Experiment::resources: result = run_resources(config, out); break;
    }
    outcome.report["status"] = "ok";
    outcome.report["outputs"] = std::move(result);
  } catch (const std::exception& e) {
    outcome.exit_code = classify(e);
    outcome.report["status"] = "error";
    outcome.report["error"] = error_json(e, outcome.exit_code);
  }
  outcome.report["timings"] = {{"total_seconds", total.seconds()}, {"threads", std::max(1, options.threads)}};
  try {
    write_file(out / "report.json", outcome.report.dump(2) + "\n");
  } catch (const std::exception& e) {
    if (outcome.exit_code == kExitOk) outcome.exit_code = kExitInternal;
    outcome.report["status"] = "error";
    outcome.report["error"] = error_json(e, outcome.exit_code);
  }
  return outcome;
}

}  // namespace qsplit::cli
