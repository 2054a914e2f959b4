#pragma once

// Error experiments around the split-step scheme: Trotter error against the
// non-split reference, resolution scans of the prefactor, spatial order, and
// the state-dependent (vector-norm) bound prefactors.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qsplit/evolve.hpp"
#include "qsplit/oracle.hpp"

namespace qsplit {

inline constexpr double kRoundoffFloor = 1e-13;

/// A PDE problem independent of resolution; grids are built on demand.
struct Problem {
  EquationKind kind = EquationKind::convection;
  ProductFormula formula = ProductFormula::standard;
  int order = 1;
  CoefficientSet coeffs;
  Expr initial;
  double horizon = 1.0;
  std::vector<int> qubits;  ///< default resolution
  int steps = 1;            ///< default L

  int dim() const { return coeffs.dim(); }
  EvolutionPlan plan(const std::vector<int>& grid_qubits, int steps_override) const;
  /// Sampled initial condition scaled to unit scaled-norm.
  Field initial_state(const GridSpec& grid) const;
};

struct CurvePoint {
  double parameter = 0.0;
  double error = 0.0;
};

struct ErrorCurve {
  std::string abscissa;  ///< "L", "n" or "dx"
  std::vector<CurvePoint> points;
  std::string metadata;
};

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> excluded;  ///< abscissae dropped at the roundoff floor
};

/// Least squares of log(error) on log(parameter), ignoring points with
/// error <= 10 * floor. Throws degenerate_fit with fewer than 3 usable points.
OrderFit order_fit(const ErrorCurve& curve, double floor = kRoundoffFloor);

struct ScanOptions {
  int reference_steps = 32;  ///< M; the reference is also run at 2M
  int threads = 1;
  bool check_reference = true;
};

struct TrotterScan {
  ErrorCurve curve;
  double reference_shift = 0.0;  ///< distance between the M and 2M references
  ReferenceResult reference;     ///< the 2M run, trajectory recorded
  ReferenceResult coarse_reference;
};

/// E(L) = distance(split-step at L, midpoint reference), normalized for
/// diffusion. Throws reference_not_converged when switching from M to 2M
/// reference steps moves any E(L) above the roundoff floor by more than 1%.
TrotterScan trotter_error_scan(const Problem& problem, const std::vector<int>& steps,
                               const ScanOptions& options = {});

struct Ingredient {
  std::string name;
  double value = 0.0;
};

struct BoundPrefactors {
  EquationKind kind = EquationKind::convection;
  double a_g = 0.0;
  double a_s = 0.0;
  /// Diffusion only: the same prefactors with 1/||phi_T|| replaced by the
  /// mean-based upper bound 1/|mean(phi_0)|.
  std::optional<double> a_g_mean_bound;
  std::optional<double> a_s_mean_bound;
  std::vector<Ingredient> ingredients;
  std::vector<std::string> warnings;
  int snapshots = 0;
};

/// Prefactors from a reference trajectory of >= 33 snapshots covering [0, T].
BoundPrefactors bound_prefactors(const EvolutionPlan& plan, const std::vector<Field>& trajectory);

/// Runs bound_prefactors on the M and 2M reference trajectories of a scan and
/// throws reference_not_converged when they differ by more than 1%.
BoundPrefactors checked_bound_prefactors(const Problem& problem, const TrotterScan& scan);

struct BoundCheck {
  enum class Status { satisfied, violated, remainder_dominated };
  Status status = Status::satisfied;
  double prefactor = 0.0;   ///< a_alpha used
  double tightness = 0.0;   ///< E L / (a_alpha T^2)
  double measured = 0.0;    ///< E L / T^2
  double largest_steps = 0.0;
  std::string notice;
};

const char* to_string(BoundCheck::Status status);

inline constexpr double kBoundSlack = 0.1;

/// Checks E L / T^2 <= a_alpha (1 + 0.1) at the largest L. Throws
/// regime_not_reached unless the last two points have E ratio within 10% of
/// the first-order prediction.
BoundCheck verify_bound(const ErrorCurve& curve, const BoundPrefactors& prefactors, double horizon,
                        ProductFormula formula);

struct ScalingRow {
  std::vector<int> qubits;
  int steps = 0;
  double error = 0.0;
  double prefactor = 0.0;       ///< C(n) = L E(L, n)
  double bound_vector = 0.0;    ///< a_alpha T^2 / L
  double bound_operator = 0.0;  ///< pairwise commutator bound in operator norm
  double a_alpha = 0.0;
  double operator_norm_growth = 0.0;  ///< ratio to the previous row (0 for the first)
};

struct ScalingReport {
  EquationKind kind = EquationKind::convection;
  ProductFormula formula = ProductFormula::standard;
  double horizon = 0.0;
  std::vector<ScalingRow> rows;
  double prefactor_spread = 0.0;  ///< max/min of C(n)
  double min_operator_growth = 0.0;
  double max_operator_growth = 0.0;
};

/// T^2/(2L) sum_{j<m} 2 ||H_j|| ||H_m|| with ||H_j|| = ||c_j|| max|d| (convection)
/// or ||kappa_j|| max d^2 (diffusion).
double operator_norm_bound(const EvolutionPlan& plan);

/// Same problem at n per axis for each n in ns, fixed L.
ScalingReport resolution_scan(const Problem& problem, const std::vector<int>& ns, int steps,
                              const ScanOptions& options = {});

struct ConvergenceResult {
  ErrorCurve curve;  ///< abscissa dx
  OrderFit fit;
  double empirical_constant = 0.0;  ///< max error / (T sum ||c_j|| dx^{2p})
};

/// Space-discretization error against the exact PDE solution. Requires
/// constant coefficients: translation for convection, spectral decay on a
/// fine grid for diffusion.
ConvergenceResult spatial_convergence(const Problem& problem, const std::vector<int>& ns);

struct QubitBudget {
  std::vector<int> qubits;
  std::vector<bool> degenerate;  ///< argument of the logarithm <= 1
};

/// n_j = ceil( log2(T K ||c_j|| / eps) / (2p) ), clamped at 0 (flagged).
QubitBudget qubit_budget(double epsilon, double horizon, int p, const std::vector<double>& sup_norms,
                         double constant);

/// One row of the experiment CSV.
struct ReportRow {
  std::string experiment;
  EquationKind kind = EquationKind::convection;
  ProductFormula formula = ProductFormula::standard;
  int p = 1;
  std::vector<int> qubits;
  int steps = 0;
  double horizon = 0.0;
  double error = 0.0;
  double bound_vector = 0.0;
  double bound_operator = 0.0;
  double prefactor = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

/// Header: experiment,kind,formula,p,n1..nd,L,T,error,bound_vector,bound_operator,prefactor,slope,r2
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows, int dimension);

}  // namespace qsplit
