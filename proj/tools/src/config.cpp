#include "qsplit_cli/config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace qsplit::cli {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "equation", "d",         "p",       "n",          "T",      "L",    "formula",
      "coefficients", "initial", "observables", "experiment", "Ls", "ns", "tolerances",
      "output",   "seed",      "trajectory", "reference_steps"};
  return keys;
}

/// Collects typed fields and records violations instead of throwing.
class Reader {
 public:
  explicit Reader(const json& j) : j_(j) {}

  std::vector<std::string>& violations() { return violations_; }
  void fail(const std::string& key, const std::string& what) { violations_.push_back("config." + key + ": " + what); }
  bool has(const char* key) const { return j_.contains(key); }

  bool string(const char* key, std::string& out, bool required) {
    if (!present(key, required)) return false;
    if (!j_[key].is_string()) return fail(key, "expected a string"), false;
    out = j_[key].get<std::string>();
    return true;
  }

  bool integer(const char* key, long long lo, long long hi, int& out, bool required) {
    if (!present(key, required)) return false;
    long long v = 0;
    if (!as_integer(j_[key], v)) return fail(key, "expected an integer"), false;
    if (v < lo || v > hi) return fail(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"), false;
    out = static_cast<int>(v);
    return true;
  }

  bool number(const char* key, double& out, bool required) {
    if (!present(key, required)) return false;
    if (!j_[key].is_number()) return fail(key, "expected a number"), false;
    out = j_[key].get<double>();
    return true;
  }

  bool boolean(const char* key, bool& out) {
    if (!present(key, false)) return false;
    if (!j_[key].is_boolean()) return fail(key, "expected true or false"), false;
    out = j_[key].get<bool>();
    return true;
  }

  bool int_list(const char* key, long long lo, long long hi, std::vector<int>& out, bool required) {
    if (!present(key, required)) return false;
    if (!j_[key].is_array()) return fail(key, "expected an array of integers"), false;
    std::vector<int> values;
    bool ok = true;
    for (std::size_t i = 0; i < j_[key].size(); ++i) {
      long long v = 0;
      const std::string at = std::string(key) + "[" + std::to_string(i) + "]";
      if (!as_integer(j_[key][i], v)) {
        fail(at, "expected an integer"), ok = false;
      } else if (v < lo || v > hi) {
        fail(at, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"), ok = false;
      } else {
        values.push_back(static_cast<int>(v));
      }
    }
    if (ok) out = std::move(values);
    return ok;
  }

  bool number_list(const char* key, std::vector<double>& out, bool required) {
    if (!present(key, required)) return false;
    if (!j_[key].is_array()) return fail(key, "expected an array of numbers"), false;
    std::vector<double> values;
    bool ok = true;
    for (std::size_t i = 0; i < j_[key].size(); ++i) {
      if (!j_[key][i].is_number()) {
        fail(std::string(key) + "[" + std::to_string(i) + "]", "expected a number"), ok = false;
      } else {
        values.push_back(j_[key][i].get<double>());
      }
    }
    if (ok) out = std::move(values);
    return ok;
  }

  bool string_list(const char* key, std::vector<std::string>& out, bool required) {
    if (!present(key, required)) return false;
    if (!j_[key].is_array()) return fail(key, "expected an array of strings"), false;
    std::vector<std::string> values;
    bool ok = true;
    for (std::size_t i = 0; i < j_[key].size(); ++i) {
      if (!j_[key][i].is_string()) {
        fail(std::string(key) + "[" + std::to_string(i) + "]", "expected a string"), ok = false;
      } else {
        values.push_back(j_[key][i].get<std::string>());
      }
    }
    if (ok) out = std::move(values);
    return ok;
  }

 private:
  bool present(const char* key, bool required) {
    if (j_.contains(key)) return true;
    if (required) fail(key, "required");
    return false;
  }

  static bool as_integer(const json& v, long long& out) {
    if (v.is_number_integer()) {
      out = v.get<long long>();
      return true;
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::fabs(d) < 9e15) {
        out = static_cast<long long>(d);
        return true;
      }
    }
    return false;
  }

  const json& j_;
  std::vector<std::string> violations_;
};

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

bool parse_double(std::string_view text, double& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

const char* to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::solve: return "solve";
    case Experiment::trotter_scan: return "trotter-scan";
    case Experiment::resolution_scan: return "resolution-scan";
    case Experiment::convergence: return "convergence";
    case Experiment::bounds: return "bounds";
    case Experiment::resources: return "resources";
  }
  return "?";
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(ErrorCode::validation, "invalid configuration: " + join(violations)),
      violations_(std::move(violations)) {}

Problem RunConfig::problem() const {
  Problem problem;
  problem.kind = equation;
  problem.formula = formula;
  problem.order = p;
  problem.coeffs = CoefficientSet::parse(equation, coefficients, d);
  problem.initial = parse_expression(initial, d);
  problem.horizon = T;
  problem.qubits = n;
  problem.steps = L;
  return problem;
}

Observable parse_observable(const std::string& text, int d) {
  if (text == "mean") return Observable::mean();
  if (text == "scaled-norm") return Observable::norm();
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::invalid_argument, "observable '" + text + "': " + why);
  };
  if (text.rfind("point:", 0) == 0) {
    std::vector<double> point;
    std::string_view rest(text);
    rest.remove_prefix(6);
    while (true) {
      const auto comma = rest.find(',');
      double v = 0.0;
      if (!parse_double(rest.substr(0, comma), v)) throw bad("malformed coordinate");
      point.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (static_cast<int>(point.size()) != d) throw bad("expected " + std::to_string(d) + " coordinates");
    return Observable::point_value(std::move(point));
  }
  if (text.rfind("moment:", 0) == 0) {
    int axis = 0;
    int order = 0;
    char colon = 0;
    std::istringstream in(text.substr(7));
    if (!(in >> axis >> colon >> order) || colon != ':' || !in.eof()) throw bad("expected moment:<axis>:<order>");
    if (axis < 1 || axis > d) throw bad("axis out of range");
    if (order < 0) throw bad("order must be >= 0");
    return Observable::axis_moment(axis - 1, order);
  }
  throw bad("expected mean, scaled-norm, point:<coords> or moment:<axis>:<order>");
}

json parse_config_text(const std::string& text) {
  if (text.size() > kMaxConfigBytes) throw ConfigError({"config: file larger than 1 MiB"});
  std::vector<std::set<std::string>> seen;
  std::vector<std::string> duplicates;
  const json::parser_callback_t callback = [&](int, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::object_start) seen.emplace_back();
    if (event == json::parse_event_t::object_end && !seen.empty()) seen.pop_back();
    if (event == json::parse_event_t::key && !seen.empty()) {
      const auto key = parsed.get<std::string>();
      if (!seen.back().insert(key).second) duplicates.push_back("config." + key + ": duplicate key");
    }
    return true;
  };
  json j;
  try {
    j = json::parse(text, callback, true, false);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    const auto colon = what.find("syntax error");
    throw ConfigError({"config: JSON syntax error at line " + std::to_string(line) + ", column " +
                       std::to_string(column) + (colon == std::string::npos ? "" : " (" + what.substr(colon) + ")")});
  }
  if (!duplicates.empty()) throw ConfigError(duplicates);
  return j;
}

void apply_overrides(json& config, const std::vector<std::string>& overrides) {
  std::vector<std::string> violations;
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      violations.push_back("override '" + item + "': expected key=value");
      continue;
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (!known_keys().count(key)) {
      violations.push_back("config." + key + ": unknown key (from --override)");
      continue;
    }
    json parsed = json::parse(value, nullptr, false, false);
    config[key] = parsed.is_discarded() ? json(value) : parsed;
  }
  if (!violations.empty()) throw ConfigError(violations);
}

RunConfig validate_config(const json& j) {
  if (!j.is_object()) throw ConfigError({"config: expected a JSON object"});
  Reader r(j);
  for (const auto& item : j.items()) {
    if (!known_keys().count(item.key())) r.fail(item.key(), "unknown key");
  }

  RunConfig c;
  std::string text;
  if (r.string("equation", text, true)) {
    if (text == "convection") {
      c.equation = EquationKind::convection;
    } else if (text == "diffusion") {
      c.equation = EquationKind::diffusion;
    } else {
      r.fail("equation", "expected \"convection\" or \"diffusion\"");
    }
  }
  const bool have_d = r.integer("d", 1, 3, c.d, true);
  const bool have_p = !r.has("p") || r.integer("p", 1, kMaxStencilOrder, c.p, false);
  const bool have_n = r.int_list("n", 1, 24, c.n, true);
  if (r.number("T", c.T, true) && !(c.T > 0.0 && std::isfinite(c.T))) r.fail("T", "must be positive");
  r.integer("L", 1, 100000000, c.L, false);
  if (r.string("formula", text, false)) {
    if (text == "standard") {
      c.formula = ProductFormula::standard;
    } else if (text == "generalized") {
      c.formula = ProductFormula::generalized;
    } else {
      r.fail("formula", "expected \"standard\" or \"generalized\"");
    }
  }
  const bool have_coeffs = r.string_list("coefficients", c.coefficients, true);
  const bool have_initial = r.string("initial", c.initial, true);
  r.string_list("observables", c.observables, false);
  if (r.string("experiment", text, false)) {
    static const std::pair<const char*, Experiment> names[] = {
        {"solve", Experiment::solve},           {"trotter-scan", Experiment::trotter_scan},
        {"resolution-scan", Experiment::resolution_scan}, {"convergence", Experiment::convergence},
        {"bounds", Experiment::bounds},         {"resources", Experiment::resources}};
    bool found = false;
    for (const auto& [name, value] : names) {
      if (text == name) c.experiment = value, found = true;
    }
    if (!found) {
      r.fail("experiment", "expected one of solve, trotter-scan, resolution-scan, convergence, bounds, resources");
    }
  }
  const bool have_Ls = r.int_list("Ls", 1, 100000000, c.Ls, false);
  const bool have_ns = r.int_list("ns", 1, 24, c.ns, false);
  if (r.number_list("tolerances", c.tolerances, false)) {
    for (std::size_t i = 0; i < c.tolerances.size(); ++i) {
      if (!(c.tolerances[i] > 0.0)) r.fail("tolerances[" + std::to_string(i) + "]", "must be positive");
    }
    if (c.tolerances.empty()) r.fail("tolerances", "must not be empty");
  }
  if (r.string("output", c.output, false) && c.output.empty()) r.fail("output", "must not be empty");
  if (r.has("seed")) {
    if (!j["seed"].is_number_unsigned()) {
      r.fail("seed", "expected a nonnegative integer");
    } else {
      c.seed = j["seed"].get<std::uint64_t>();
    }
  }
  r.boolean("trajectory", c.trajectory);
  r.integer("reference_steps", 1, 1000000, c.reference_steps, false);

  // lengths and expressions
  if (have_d && have_n && static_cast<int>(c.n.size()) != c.d) {
    r.fail("n", "has " + std::to_string(c.n.size()) + " entries, expected d = " + std::to_string(c.d));
  }
  bool exprs_ok = have_d && have_coeffs;
  if (exprs_ok && static_cast<int>(c.coefficients.size()) != c.d) {
    r.fail("coefficients", "has " + std::to_string(c.coefficients.size()) + " entries, expected d = " + std::to_string(c.d));
    exprs_ok = false;
  }
  if (exprs_ok) {
    for (std::size_t i = 0; i < c.coefficients.size(); ++i) {
      try {
        (void)parse_expression(c.coefficients[i], c.d);
      } catch (const Error& e) {
        r.fail("coefficients[" + std::to_string(i) + "]", e.what());
        exprs_ok = false;
      }
    }
  }
  if (have_d && have_initial) {
    try {
      (void)parse_expression(c.initial, c.d);
    } catch (const Error& e) {
      r.fail("initial", e.what());
    }
  }
  if (have_d) {
    for (std::size_t i = 0; i < c.observables.size(); ++i) {
      try {
        (void)parse_observable(c.observables[i], c.d);
      } catch (const Error& e) {
        r.fail("observables[" + std::to_string(i) + "]", e.what());
      }
    }
  }

  // grid admissibility
  const int min_qubits = [&] {
    int q = 1;
    while ((1 << q) <= 2 * c.p) ++q;
    return q;
  }();
  bool grid_ok = have_d && have_n && have_p && static_cast<int>(c.n.size()) == c.d;
  if (grid_ok) {
    for (std::size_t i = 0; i < c.n.size(); ++i) {
      if (c.n[i] < min_qubits) {
        r.fail("n[" + std::to_string(i) + "]", "2^n must exceed 2p; need n >= " + std::to_string(min_qubits));
        grid_ok = false;
      }
    }
    try {
      (void)GridSpec(c.n);
    } catch (const Error& e) {
      r.fail("n", e.what());
      grid_ok = false;
    }
  }
  if (have_ns && have_p) {
    for (std::size_t i = 0; i < c.ns.size(); ++i) {
      if (c.ns[i] < min_qubits) r.fail("ns[" + std::to_string(i) + "]", "need n >= " + std::to_string(min_qubits));
    }
  }

  // experiment requirements
  switch (c.experiment) {
    case Experiment::solve:
    case Experiment::resources:
      if (!j.contains("L")) r.fail("L", "required for experiment " + std::string(to_string(c.experiment)));
      break;
    case Experiment::trotter_scan:
    case Experiment::bounds:
      if (c.reference_steps < 32) r.fail("reference_steps", "must be >= 32 for bound prefactors");
      if (!have_Ls) {
        if (!j.contains("Ls")) r.fail("Ls", "required for experiment " + std::string(to_string(c.experiment)));
      } else if (c.Ls.size() < (c.experiment == Experiment::bounds ? 2u : 3u)) {
        r.fail("Ls", "needs at least " + std::string(c.experiment == Experiment::bounds ? "2" : "3") + " entries");
      }
      break;
    case Experiment::resolution_scan:
      if (!j.contains("L")) r.fail("L", "required for experiment resolution-scan");
      if (!j.contains("ns")) r.fail("ns", "required for experiment resolution-scan");
      break;
    case Experiment::convergence:
      if (!have_ns) {
        if (!j.contains("ns")) r.fail("ns", "required for experiment convergence");
      } else if (c.ns.size() < 3) {
        r.fail("ns", "needs at least 3 entries");
      }
      break;
  }

  // coefficient semantics on the grid
  if (exprs_ok && grid_ok && r.violations().empty()) {
    const auto set = CoefficientSet::parse(c.equation, c.coefficients, c.d);
    const GridSpec grid(c.n);
    const auto times = sample_times({0.0, c.T});
    try {
      const auto report = validate_independence(set, grid, times);
      for (const auto& axis : report.axes) {
        if (axis.passed) continue;
        std::ostringstream os;
        os << "coefficient for axis " << axis.axis + 1 << " depends on x" << axis.axis + 1 << " (variation "
           << axis.max_variation << ")";
        r.fail("coefficients[" + std::to_string(axis.axis) + "]", os.str());
      }
      if (c.equation == EquationKind::diffusion) {
        for (int axis = 0; axis < c.d; ++axis) {
          if (min_value(set[axis], grid, {0.0, c.T}) < 0.0) {
            r.fail("coefficients[" + std::to_string(axis) + "]", "diffusion coefficient takes negative values");
          }
        }
      }
      (void)sample_function(grid, parse_expression(c.initial, c.d), 0.0);
    } catch (const EvalError& e) {
      r.fail("coefficients", e.what());
    }
    if (c.experiment == Experiment::convergence) {
      for (int axis = 0; axis < c.d; ++axis) {
        const auto& e = set[axis];
        if (e.depends_on_time() || e.uses(Variable::x1) || e.uses(Variable::x2) || e.uses(Variable::x3)) {
          r.fail("coefficients[" + std::to_string(axis) + "]", "convergence needs constant coefficients");
        }
      }
    }
  }

  if (!r.violations().empty()) throw ConfigError(r.violations());

  json echo = j;
  echo["formula"] = to_string(c.formula);
  echo["p"] = c.p;
  echo["observables"] = c.observables;
  echo["experiment"] = to_string(c.experiment);
  echo["tolerances"] = c.tolerances;
  echo["output"] = c.output;
  echo["trajectory"] = c.trajectory;
  echo["reference_steps"] = c.reference_steps;
  echo["seed"] = c.seed;
  if (!j.contains("L")) echo["L"] = c.L;
  c.source = std::move(echo);
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw ConfigError({"config: cannot read " + path.string() + ": " + ec.message()});
  if (size > kMaxConfigBytes) throw ConfigError({"config: file larger than 1 MiB"});
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"config: cannot open " + path.string()});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json j = parse_config_text(buffer.str());
  apply_overrides(j, overrides);
  return validate_config(j);
}

}  // namespace qsplit::cli
