// Acceptance suite: one PASS/FAIL line per criterion, with runtime limits.

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsplit/analysis.hpp"
#include "qsplit/error.hpp"
#include "qsplit/oracle.hpp"
#include "qsplit/stencil.hpp"
#include "qsplit/walsh.hpp"
#include "support/parser_cases.hpp"
#include "support/problems.hpp"
#include "support/random_expr.hpp"

namespace {

using namespace qsplit;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> body;
};

// Criteria whose FAIL is an analysed conflict between the stated property and
// the mathematics of the criterion-5 problem; see README "Known deviations".
const std::map<int, const char*> kKnownConflicts = {
    {8, "derivative norms are not invariants of variable-coefficient convection"},
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// ---------------------------------------------------------------- oracles

/// Closed-form stencil weights in long double, a_{-p..p}.
std::vector<long double> oracle_weights(int p) {
  auto fact = [](int k) {
    long double f = 1.0L;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  std::vector<long double> a(static_cast<std::size_t>(2 * p + 1), 0.0L);
  for (int k = 1; k <= p; ++k) {
    const long double v = (k % 2 == 1 ? 1.0L : -1.0L) * fact(p) * fact(p) / (k * fact(p - k) * fact(p + k));
    a[static_cast<std::size_t>(p + k)] = v;
    a[static_cast<std::size_t>(p - k)] = -v;
  }
  return a;
}

double oracle_moment_residual(const StencilCoefficients& s) {
  const int p = s.order;
  long double worst = 0.0L;
  for (int j = 0; j <= 2 * p; ++j) {
    long double sum = 0.0L;
    long double scale = 0.0L;
    for (int k = -p; k <= p; ++k) {
      const long double term = static_cast<long double>(s[k]) * std::pow(static_cast<long double>(k), j);
      sum += term;
      scale += std::fabs(term);
    }
    if (j == 1) sum -= 1.0L;
    worst = std::max(worst, std::fabs(sum) / std::max(1.0L, scale));
  }
  return static_cast<double>(worst);
}

/// d_k = (2/dx) sum_q a_q sin(2 pi q k / N) from the oracle weights.
std::vector<double> oracle_symbol(int p, int n) {
  const auto a = oracle_weights(p);
  const std::size_t N = std::size_t{1} << n;
  std::vector<double> d(N);
  for (std::size_t k = 0; k < N; ++k) {
    long double s = 0.0L;
    for (int q = 1; q <= p; ++q) {
      s += a[static_cast<std::size_t>(p + q)] * std::sin(2.0L * kPi * q * static_cast<long double>(k) / N);
    }
    d[k] = static_cast<double>(2.0L * N * s);
  }
  return d;
}

/// -i/dx sum_k a_k S^k along `axis`, (S^k v)[x] = v[x + k e_axis].
Eigen::MatrixXcd oracle_derivative(const GridSpec& grid, int axis, int p) {
  const auto a = oracle_weights(p);
  const std::size_t N = grid.size();
  const std::size_t n_axis = grid.points(axis);
  const double inv_dx = static_cast<double>(n_axis);
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  std::vector<std::size_t> idx(static_cast<std::size_t>(grid.dim()));
  for (std::size_t i = 0; i < N; ++i) {
    grid.unravel(i, idx);
    const std::size_t own = idx[static_cast<std::size_t>(axis)];
    for (int k = -p; k <= p; ++k) {
      if (k == 0) continue;
      auto moved = idx;
      moved[static_cast<std::size_t>(axis)] = (own + n_axis + static_cast<std::size_t>(k + static_cast<int>(n_axis))) % n_axis;
      const std::size_t j = grid.ravel(moved);
      D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
          Complex(0.0, -inv_dx * static_cast<double>(a[static_cast<std::size_t>(p + k)]));
    }
  }
  return D;
}

/// exp(scale * H) for Hermitian H.
Eigen::MatrixXcd hermitian_exp(const Eigen::MatrixXcd& H, Complex scale) {
  const Eigen::MatrixXcd sym = 0.5 * (H + H.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sym);
  const Eigen::VectorXcd phases = (scale * eig.eigenvalues().cast<Complex>()).array().exp();
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

std::vector<Complex> naive_dft(const std::vector<Complex>& v, int sign) {
  const std::size_t N = v.size();
  std::vector<Complex> out(N);
  for (std::size_t k = 0; k < N; ++k) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      s += v[j] * std::polar(1.0, sign * 2.0 * kPi * static_cast<double>((j * k) % N) / static_cast<double>(N));
    }
    out[k] = s;
  }
  return out;
}

struct Fit {
  double slope = 0.0;
  double r2 = 0.0;
  int used = 0;
};

/// Least squares of log y on log x over points with y > floor.
Fit log_fit(const std::vector<double>& x, const std::vector<double>& y, double floor = 1e-12) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > floor) lx.push_back(std::log(x[i])), ly.push_back(std::log(y[i]));
  }
  Fit f;
  f.used = static_cast<int>(lx.size());
  if (f.used < 3) return f;
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / n, my += ly[i] / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  f.slope = sxy / sxx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

Fit curve_fit(const ErrorCurve& curve) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : curve.points) x.push_back(p.parameter), y.push_back(p.error);
  return log_fit(x, y);
}

double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

const char* kind_name(EquationKind k) { return k == EquationKind::convection ? "conv" : "diff"; }

// The criterion-5 scans are shared by criteria 7 and 8.
std::map<EquationKind, TrotterScan>& scans() {
  static std::map<EquationKind, TrotterScan> cache;
  return cache;
}

const std::vector<int> kScanSteps{8, 16, 32, 64, 128, 256, 512};

Problem criterion_problem(EquationKind kind, ProductFormula formula = ProductFormula::standard) {
  return kind == EquationKind::convection ? fixtures::sheared_convection(formula)
                                          : fixtures::sheared_diffusion(formula);
}

const TrotterScan& scan_for(EquationKind kind) {
  auto& cache = scans();
  auto it = cache.find(kind);
  if (it == cache.end()) it = cache.emplace(kind, trotter_error_scan(criterion_problem(kind), kScanSteps)).first;
  return it->second;
}

// ---------------------------------------------------------------- criteria

Outcome stencil_correctness() {
  double worst_residual = 0.0;
  double worst_oracle_residual = 0.0;
  double worst_agreement = 0.0;
  double worst_vs_oracle = 0.0;
  for (int p = 1; p <= 8; ++p) {
    const auto closed = stencil_coefficients(p);
    const auto solved = stencil_coefficients_from_moments(p);
    const auto oracle = oracle_weights(p);
    worst_residual = std::max({worst_residual, moment_residual(closed), moment_residual(solved)});
    worst_oracle_residual = std::max({worst_oracle_residual, oracle_moment_residual(closed), oracle_moment_residual(solved)});
    for (int k = -p; k <= p; ++k) {
      worst_agreement = std::max(worst_agreement, std::fabs(closed[k] - solved[k]));
      worst_vs_oracle = std::max(worst_vs_oracle,
                                 std::fabs(closed[k] - static_cast<double>(oracle[static_cast<std::size_t>(p + k)])));
    }
  }
  const bool pass = worst_residual < 1e-12 && worst_oracle_residual < 1e-12 && worst_agreement < 1e-12 &&
                    worst_vs_oracle < 1e-12;
  return {pass, fmt("max moment residual %.2e (independent %.2e), closed vs solve %.2e, vs oracle %.2e; tol 1e-12",
                    worst_residual, worst_oracle_residual, worst_agreement, worst_vs_oracle)};
}

Outcome symbol_consistency() {
  double worst_eig = 0.0;
  double worst_lib = 0.0;
  for (int p = 1; p <= 3; ++p) {
    for (int n = 1; n <= 5; ++n) {
      if ((1 << n) <= 2 * p) continue;
      const GridSpec grid(std::vector<int>{n});
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(oracle_derivative(grid, 0, p));
      std::vector<double> lambda(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
      auto lib = derivative_symbol(stencil_coefficients(p), n).values;
      auto ref = oracle_symbol(p, n);
      std::sort(lambda.begin(), lambda.end());
      std::sort(lib.begin(), lib.end());
      std::sort(ref.begin(), ref.end());
      for (std::size_t k = 0; k < lambda.size(); ++k) {
        worst_eig = std::max({worst_eig, std::fabs(lambda[k] - lib[k]), std::fabs(ref[k] - lib[k])});
      }
      worst_lib = std::max(worst_lib, verify_symbol_against_dense(stencil_coefficients(p), n));
    }
  }

  // one split step against the dense exponential product, axis 1 applied first
  double worst_step = 0.0;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  const double t = 0.3;
  const double h = 0.1;
  for (EquationKind kind : {EquationKind::convection, EquationKind::diffusion}) {
    for (ProductFormula formula : {ProductFormula::standard, ProductFormula::generalized}) {
      for (int p = 1; p <= 2; ++p) {
        Problem problem = criterion_problem(kind, formula);
        problem.order = p;
        problem = fixtures::with_coefficients(
            problem, kind == EquationKind::convection
                         ? std::vector<std::string>{"1+0.5*sin(2*pi*x2)+0.3*t", "1+0.5*cos(2*pi*x1)"}
                         : std::vector<std::string>{"0.5*(1+0.5*sin(2*pi*x2))+0.3*t", "1+0.5*cos(2*pi*x1)*t"});
        const EvolutionPlan plan = problem.plan({3, 3}, 1);
        const GridSpec& grid = plan.grid;
        std::vector<Complex> amps(grid.size());
        for (auto& a : amps) a = Complex(normal(rng), normal(rng));
        const Field start(grid, amps, t);

        Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(amps.data(), static_cast<Eigen::Index>(amps.size()));
        std::vector<double> x(2);
        for (int axis = 0; axis < 2; ++axis) {
          const Eigen::MatrixXcd D = oracle_derivative(grid, axis, p);
          const Eigen::MatrixXcd G = kind == EquationKind::convection ? D : Eigen::MatrixXcd(D * D);
          Eigen::VectorXd weight(static_cast<Eigen::Index>(grid.size()));
          for (std::size_t i = 0; i < grid.size(); ++i) {
            grid.coordinates(i, x);
            const auto& c = problem.coeffs[axis];
            double w = 0.0;
            if (formula == ProductFormula::standard) {
              w = h * c.evaluate(x, t + h);
            } else {
              // coefficients are affine in t: the midpoint rule is exact
              w = h * c.evaluate(x, t + 0.5 * h);
            }
            weight(static_cast<Eigen::Index>(i)) = w;
          }
          const Eigen::MatrixXcd H = weight.cast<Complex>().asDiagonal() * G;
          const Complex scale = kind == EquationKind::convection ? Complex(0.0, -1.0) : Complex(-1.0, 0.0);
          v = hermitian_exp(H, scale) * v;
        }
        const Field stepped = kind == EquationKind::convection ? convection_step(start, t, h, plan)
                                                                : diffusion_step(start, t, h, plan);
        const std::span<const Complex> dense(v.data(), static_cast<std::size_t>(v.size()));
        worst_step = std::max(worst_step, max_abs_diff(stepped.amplitudes(), dense) / scaled_norm(start));
      }
    }
  }
  const bool pass = worst_eig < 1e-10 && worst_lib < 1e-10 && worst_step < 1e-10;
  return {pass, fmt("eigenvalues vs symbol %.2e (library check %.2e), split step vs dense product %.2e; tol 1e-10",
                    worst_eig, worst_lib, worst_step)};
}

Outcome structural_conservation() {
  const int steps = 1000;
  // convection
  Problem conv = fixtures::sheared_convection();
  EvolutionPlan cplan = conv.plan({5, 5}, steps);
  const Field c0 = conv.initial_state(cplan.grid);
  const auto cres = evolve(cplan, c0);
  const double n0 = scaled_norm(c0);
  double norm_drift = 0.0;
  for (double nrm : cres.report.norms) norm_drift = std::max(norm_drift, std::fabs(nrm - n0) / n0);

  // diffusion
  Problem diff = fixtures::sheared_diffusion();
  EvolutionPlan dplan = diff.plan({5, 5}, steps);
  dplan.record_trajectory = true;
  const Field d0 = sample_function(dplan.grid, diff.initial, 0.0);
  const auto dres = evolve(dplan, d0);
  auto mean = [](const Field& f) {
    Complex s = 0.0;
    for (const auto& a : f.amplitudes()) s += a;
    return s / static_cast<double>(f.size());
  };
  const Complex m0 = mean(d0);
  double mean_drift = 0.0;
  int increases = 0;
  double previous = scaled_norm(d0);
  for (const auto& state : dres.trajectory) {
    mean_drift = std::max(mean_drift, std::abs(mean(state) - m0) / std::abs(m0));
    const double nrm = scaled_norm(state);
    if (nrm > previous) ++increases;
    previous = nrm;
  }
  const bool pass = norm_drift < 1e-12 && mean_drift < 1e-12 && increases == 0 &&
                    dres.trajectory.size() == static_cast<std::size_t>(steps) + 1;
  return {pass, fmt("convection scaled-norm drift %.2e, diffusion mean drift %.2e, norm increases %d over %d steps; tol 1e-12",
                    norm_drift, mean_drift, increases, steps)};
}

Outcome spatial_order() {
  std::string detail;
  bool pass = true;
  double worst_cross = 0.0;
  for (int p = 1; p <= 3; ++p) {
    Problem problem = criterion_problem(EquationKind::convection);
    problem.order = p;
    problem.coeffs = CoefficientSet::parse(EquationKind::convection, {"1"}, 1);
    problem.initial = parse_expression("exp(sin(2*pi*x1))", 1);
    const double T = problem.horizon;
    std::vector<double> dx;
    std::vector<double> err;
    for (int n = 4; n <= 9; ++n) {
      const EvolutionPlan plan = problem.plan({n}, 1);
      const std::size_t N = plan.grid.size();
      const Field f0 = sample_function(plan.grid, problem.initial, 0.0);
      const Field split = evolve(plan, f0).final_state;

      // semi-discrete closed form by a direct DFT
      const auto symbol = oracle_symbol(p, n);
      std::vector<Complex> v(f0.amplitudes().begin(), f0.amplitudes().end());
      auto modes = naive_dft(v, -1);
      for (std::size_t k = 0; k < N; ++k) modes[k] *= std::polar(1.0, -T * symbol[k]) / static_cast<double>(N);
      const auto discrete = naive_dft(modes, +1);
      worst_cross = std::max(worst_cross, max_abs_diff(split.amplitudes(), discrete));

      double sum = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(N);
        const double exact = std::exp(std::sin(2.0 * kPi * (x - T)));
        sum += std::norm(split[i] - exact);
      }
      dx.push_back(1.0 / static_cast<double>(N));
      err.push_back(std::sqrt(sum / static_cast<double>(N)));
    }
    const Fit fit = log_fit(dx, err);
    const bool ok = fit.used >= 3 && std::fabs(fit.slope - 2 * p) <= 0.3 && fit.r2 >= 0.99;
    pass = pass && ok;
    detail += fmt("p=%d order %.3f (R2 %.4f, %d pts); ", p, fit.slope, fit.r2, fit.used);
  }
  pass = pass && worst_cross < 1e-12;
  return {pass, detail + fmt("split vs DFT closed form %.2e; window 2p+-0.3, R2>=0.99", worst_cross)};
}

Outcome trotter_order() {
  std::string detail;
  bool pass = true;
  for (EquationKind kind : {EquationKind::convection, EquationKind::diffusion}) {
    const auto& scan = scan_for(kind);
    const Fit fit = curve_fit(scan.curve);
    const bool ok = fit.used >= 3 && fit.slope >= -1.15 && fit.slope <= -0.85;
    pass = pass && ok;
    detail += fmt("%s slope %.3f (R2 %.4f, E(8)=%.2e, E(512)=%.2e); ", kind_name(kind), fit.slope, fit.r2,
                  scan.curve.points.front().error, scan.curve.points.back().error);
  }
  return {pass, detail + "window [-1.15, -0.85]"};
}

Outcome vector_norm_scaling() {
  std::string detail;
  bool pass = true;
  const int L = 64;
  for (EquationKind kind : {EquationKind::convection, EquationKind::diffusion}) {
    const Problem problem = criterion_problem(kind);
    const auto report = resolution_scan(problem, {4, 5, 6, 7}, L);
    double cmin = 1e300;
    double cmax = 0.0;
    double gmin = 1e300;
    double worst_column = 0.0;
    for (std::size_t r = 0; r < report.rows.size(); ++r) {
      const auto& row = report.rows[r];
      const double C = L * row.error;
      cmin = std::min(cmin, C);
      cmax = std::max(cmax, C);
      // T^2/(2L) * 2 ||H_1|| ||H_2||, ||H_j|| = sup|c_j| * max|d|^q
      const auto symbol = oracle_symbol(problem.order, row.qubits[0]);
      double dmax = 0.0;
      for (double d : symbol) dmax = std::max(dmax, std::fabs(d));
      const double power = kind == EquationKind::convection ? dmax : dmax * dmax;
      const double sup = kind == EquationKind::convection ? 1.5 : 0.03;
      const double column = problem.horizon * problem.horizon / L * (sup * power) * (sup * power);
      worst_column = std::max(worst_column, std::fabs(row.bound_operator - column) / column);
      if (r > 0) gmin = std::min(gmin, row.bound_operator / report.rows[r - 1].bound_operator);
    }
    const double need = kind == EquationKind::convection ? 3.5 : 14.0;
    const double spread = cmax / cmin;
    const bool ok = spread < 2.0 && gmin >= need && worst_column < 1e-9;
    pass = pass && ok;
    detail += fmt("%s prefactor spread %.3f, operator growth >= %.2f (need %.1f), column vs oracle %.1e; ",
                  kind_name(kind), spread, gmin, need, worst_column);
  }
  return {pass, detail + "spread < 2"};
}

Outcome bound_validity() {
  std::string detail;
  bool pass = true;
  for (EquationKind kind : {EquationKind::convection, EquationKind::diffusion}) {
    for (ProductFormula formula : {ProductFormula::standard, ProductFormula::generalized}) {
      const Problem problem = criterion_problem(kind, formula);
      const TrotterScan scan = formula == ProductFormula::standard ? scan_for(kind)
                                                                    : trotter_error_scan(problem, kScanSteps);
      const auto pf = checked_bound_prefactors(problem, scan);
      const auto check = verify_bound(scan.curve, pf, problem.horizon, formula);
      const auto& last = scan.curve.points.back();
      const double a = formula == ProductFormula::standard ? pf.a_s : pf.a_g;
      const double ratio = last.error * last.parameter / (problem.horizon * problem.horizon) / a;
      const bool ok = check.status == BoundCheck::Status::satisfied && ratio <= 1.1;
      pass = pass && ok;
      detail += fmt("%s/%s E*L/T^2 = %.3e vs a = %.3e, ratio %.4f (%s); ", kind_name(kind),
                    formula == ProductFormula::standard ? "a_s" : "a_g", ratio * a, a, ratio,
                    to_string(check.status));
    }
  }
  return {pass, detail + "tol 1.1"};
}

Outcome derivative_norm_conservation() {
  const auto& scan = scan_for(EquationKind::convection);
  const auto& trajectory = scan.reference.trajectory;
  std::string detail;
  double worst = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    const double at0 = scaled_norm(spectral_derivative(trajectory.front(), axis, 1));
    double peak = at0;
    for (const auto& state : trajectory) peak = std::max(peak, scaled_norm(spectral_derivative(state, axis, 1)));
    const double change = (peak - at0) / at0;
    worst = std::max(worst, change);
    detail += fmt("axis %d: |d f_0| %.4f, max_t |d f_t| %.4f (%+.1f%%); ", axis + 1, at0, peak, 100.0 * change);
  }
  return {worst < 0.02, detail + fmt("over %zu reference snapshots; tol 2%%", trajectory.size())};
}

/// Same measurement with constant velocities, printed for context only.
std::string derivative_norm_constant_velocity() {
  const GridSpec grid(std::vector<int>{5, 5});
  const auto coeffs = CoefficientSet::parse(EquationKind::convection, {"1", "0.5"}, 2);
  const Problem base = criterion_problem(EquationKind::convection);
  const Field start = base.initial_state(grid);
  const auto ref = reference_evolution(grid, coeffs, 1, 1.0, start, {32, ReferenceBackend::matrix_free, true});
  double worst = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    const double at0 = scaled_norm(spectral_derivative(ref.trajectory.front(), axis, 1));
    for (const auto& s : ref.trajectory) {
      worst = std::max(worst, std::fabs(scaled_norm(spectral_derivative(s, axis, 1)) - at0) / at0);
    }
  }
  return fmt("constant velocities (1, 0.5), same initial data: max relative change %.2e", worst);
}

Outcome formula_equivalence() {
  std::size_t compared = 0;
  bool identical = true;
  for (EquationKind kind : {EquationKind::convection, EquationKind::diffusion}) {
    EvolutionPlan a = criterion_problem(kind, ProductFormula::standard).plan({5, 5}, 64);
    EvolutionPlan b = criterion_problem(kind, ProductFormula::generalized).plan({5, 5}, 64);
    a.record_trajectory = b.record_trajectory = true;
    const Field f0 = criterion_problem(kind).initial_state(a.grid);
    const auto ra = evolve(a, f0);
    const auto rb = evolve(b, f0);
    for (std::size_t l = 0; l < ra.trajectory.size(); ++l) {
      const auto x = ra.trajectory[l].amplitudes();
      const auto y = rb.trajectory[l].amplitudes();
      identical = identical && std::memcmp(x.data(), y.data(), x.size_bytes()) == 0;
      ++compared;
    }
  }

  Problem timed = fixtures::with_coefficients(fixtures::sheared_convection(),
                                              {"(1+0.5*sin(2*pi*x2))*(1+0.5*sin(2*pi*t))", "1+0.5*cos(2*pi*x1)"});
  const EvolutionPlan plan = timed.plan({5, 5}, 64);
  const auto ref = reference_evolution(plan.grid, timed.coeffs, 1, timed.horizon, timed.initial_state(plan.grid),
                                       {32, ReferenceBackend::matrix_free, true});
  const auto pf = bound_prefactors(plan, ref.trajectory);
  const bool pass = identical && compared == 130 && pf.a_s > pf.a_g;
  return {pass, fmt("%zu snapshots %s; t-dependent c: a_s = %.6f > a_g = %.6f", compared,
                    identical ? "bitwise equal" : "DIFFER", pf.a_s, pf.a_g)};
}

Outcome walsh_estimator() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  double worst_roundtrip = 0.0;
  double worst_naive = 0.0;
  for (int m = 1; m <= 20; ++m) {
    std::vector<double> v(std::size_t{1} << m);
    for (auto& x : v) x = uniform(rng);
    const auto series = fwht(v);
    const auto back = inverse_fwht(series);
    for (std::size_t i = 0; i < v.size(); ++i) worst_roundtrip = std::max(worst_roundtrip, std::fabs(back[i] - v[i]));
    if (m <= 10) {
      for (std::size_t w = 0; w < v.size(); ++w) {
        double s = 0.0;
        for (std::size_t x = 0; x < v.size(); ++x) s += (std::popcount(w & x) % 2 ? -v[x] : v[x]);
        worst_naive = std::max(worst_naive, std::fabs(s / static_cast<double>(v.size()) - series.coefficients[w]));
      }
    }
  }

  const int m = 10;
  const std::size_t N = std::size_t{1} << m;
  std::vector<std::size_t> budgets;
  for (std::size_t b = 0; b <= 16; ++b) budgets.push_back(b);
  for (std::size_t b = 32; b <= N; b *= 2) budgets.push_back(b);
  int nonmonotone = 0;
  int full_nonzero = 0;
  double worst_certificate = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> phase(N);
    std::vector<double> amp(4);
    std::vector<double> shift(4);
    for (int j = 0; j < 4; ++j) amp[j] = uniform(rng), shift[j] = kPi * uniform(rng);
    for (std::size_t i = 0; i < N; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(N);
      for (int j = 0; j < 4; ++j) phase[i] += amp[j] * std::sin(2.0 * kPi * (j + 1) * x + shift[j]);
    }
    const auto series = fwht(phase);
    double previous = 1e300;
    for (std::size_t b : budgets) {
      const auto sparse = sparsify(series, b);
      if (sparse.sup_error > previous) ++nonmonotone;
      previous = sparse.sup_error;
      // certificate against direct synthesis of the truncated series
      double actual = 0.0;
      for (std::size_t x = 0; x < N; ++x) {
        double s = 0.0;
        for (auto w : sparse.retained) s += std::popcount(w & x) % 2 ? -series.coefficients[w] : series.coefficients[w];
        actual = std::max(actual, std::fabs(s - phase[x]));
      }
      worst_certificate = std::max(worst_certificate, std::fabs(actual - sparse.sup_error));
    }
    if (sparsify(series, N).sup_error != 0.0) ++full_nonzero;
  }

  // hand counts: rotations = masks != 0, entangling = 2 (popcount - 1)
  const std::vector<std::uint32_t> set_a{0b1, 0b11, 0b101, 0b111};
  const std::vector<std::uint32_t> set_b{0, 0b1111, 0b1000};
  const auto ga = gate_count(set_a);
  const auto gb = gate_count(set_b);
  const bool gates_ok = ga.rotations == 4 && ga.entangling == 8 && gb.rotations == 2 && gb.entangling == 6;

  const bool pass = worst_roundtrip < 1e-12 && worst_naive < 1e-12 && full_nonzero == 0 && nonmonotone == 0 &&
                    worst_certificate < 1e-12 && gates_ok;
  return {pass, fmt("round trip %.2e (m<=20), vs naive %.2e, full-budget nonzero %d, monotonicity breaks %d, "
                    "certificate gap %.2e, gate spot checks %s",
                    worst_roundtrip, worst_naive, full_nonzero, nonmonotone, worst_certificate,
                    gates_ok ? "ok" : "WRONG")};
}

Outcome parser_suite() {
  constexpr std::array<double, 3> point{0.25, 0.5, 0.75};
  int golden_fail = 0;
  const auto& cases = fixtures::parser_golden_cases();
  for (const auto& c : cases) {
    if (c.ok) {
      try {
        const double v = parse_expression(c.text, c.dimension)
                             .evaluate(std::span<const double>(point.data(), static_cast<std::size_t>(c.dimension)), 0.5);
        if (std::fabs(v - c.value) > 1e-15 * std::max(1.0, std::fabs(c.value))) ++golden_fail;
      } catch (const Error&) {
        ++golden_fail;
      }
    } else {
      try {
        (void)parse_expression(c.text, c.dimension);
        ++golden_fail;
      } catch (const ParseError& e) {
        if (e.offset() != c.offset) ++golden_fail;
      }
    }
  }
  int roundtrip_fail = 0;
  int trees = 0;
  for (int d = 1; d <= 3; ++d) {
    fixtures::RandomExprGenerator gen(4242 + d, d);
    const int count = d == 1 ? 400 : 300;
    for (int i = 0; i < count; ++i, ++trees) {
      const Expr e = gen.next();
      const std::string text = e.to_string();
      const Expr r = parse_expression(text, d);
      if (!(e == r) || r.to_string() != text) ++roundtrip_fail;
    }
  }
  const bool pass = cases.size() == 50 && golden_fail == 0 && trees == 1000 && roundtrip_fail == 0;
  return {pass, fmt("golden %zu cases, %d failures; round trip %d trees, %d failures", cases.size(), golden_fail,
                    trees, roundtrip_fail)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "stencil correctness", 1.0, stencil_correctness},
      {2, "symbol/operator consistency", 30.0, symbol_consistency},
      {3, "structural conservation", 30.0, structural_conservation},
      {4, "spatial order 2p", 60.0, spatial_order},
      {5, "first-order Trotter convergence", 300.0, trotter_order},
      {6, "vector-norm prefactor scaling", 600.0, vector_norm_scaling},
      {7, "bound validity", 300.0, bound_validity},
      {8, "derivative-norm conservation", 60.0, derivative_norm_conservation},
      {9, "standard = generalized for t-independent c", 60.0, formula_equivalence},
      {10, "Walsh estimator", 60.0, walsh_estimator},
      {11, "expression parser", 10.0, parser_suite},
  };

  int failed = 0;
  int unexpected = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.body();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.limit_seconds;
    const bool pass = outcome.pass && in_time;
    std::printf("%s criterion %d (%s): %s [%.2fs of %.0fs]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), seconds, c.limit_seconds);
    if (c.id == 8) std::printf("      info: %s\n", derivative_norm_constant_velocity().c_str());
    if (!pass) {
      ++failed;
      const auto known = kKnownConflicts.find(c.id);
      if (known == kKnownConflicts.end()) {
        ++unexpected;
      } else {
        std::printf("      known conflict: %s\n", known->second);
      }
    }
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed, %d failed (%d unexpected)\n", static_cast<int>(criteria.size()) - failed,
              criteria.size(), failed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
