#include "qsplit/coeffs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>

#include "qsplit/error.hpp"

namespace qsplit {

const char* to_string(EquationKind kind) {
  return kind == EquationKind::convection ? "convection" : "diffusion";
}

bool CoefficientSet::time_dependent() const {
  return std::any_of(exprs.begin(), exprs.end(), [](const Expr& e) { return e.depends_on_time(); });
}

CoefficientSet CoefficientSet::parse(EquationKind kind, const std::vector<std::string>& texts,
                                     int dimension) {
  if (static_cast<int>(texts.size()) != dimension) {
    throw Error(ErrorCode::invalid_argument, "expected " + std::to_string(dimension) +
                                                 " coefficient expressions, got " +
                                                 std::to_string(texts.size()));
  }
  CoefficientSet set;
  set.kind = kind;
  for (const auto& text : texts) set.exprs.push_back(parse_expression(text, dimension));
  return set;
}

std::vector<double> sample_times(TimeWindow window, int count) {
  if (window.t1 <= window.t0 || count < 2) return {window.t0};
  std::vector<double> times(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    times[i] = window.t0 + (window.t1 - window.t0) * static_cast<double>(i) / (count - 1);
  }
  return times;
}

std::string IndependenceReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  for (const auto& a : axes) {
    if (a.passed) continue;
    os << "coefficient for axis " << (a.axis + 1) << " depends on x" << (a.axis + 1)
       << " (variation " << a.max_variation << " at x=(";
    for (std::size_t i = 0; i < a.worst_point.size(); ++i) os << (i ? ", " : "") << a.worst_point[i];
    os << "), t=" << a.worst_time << "); ";
  }
  return os.str();
}

IndependenceReport validate_independence(const CoefficientSet& set, const GridSpec& grid,
                                         std::span<const double> times) {
  if (set.dim() != grid.dim()) {
    throw Error(ErrorCode::invalid_argument, "coefficient set and grid dimensions differ");
  }
  IndependenceReport report;
  std::array<double, 3> x{};
  const std::span<double> coords(x.data(), static_cast<std::size_t>(grid.dim()));
  for (int axis = 0; axis < grid.dim(); ++axis) {
    AxisIndependence result;
    result.axis = axis;
    const std::size_t n = grid.points(axis);
    const std::size_t stride = grid.stride(axis);
    for (double t : times) {
      for (std::size_t line = 0; line < grid.lines(axis); ++line) {
        const std::size_t start = grid.line_start(axis, line);
        double lo = 0.0;
        double hi = 0.0;
        std::size_t lo_at = start;
        std::size_t hi_at = start;
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t flat = start + k * stride;
          grid.coordinates(flat, coords);
          const double v = set[axis].evaluate(coords, t);
          if (k == 0 || v < lo) lo = v, lo_at = flat;
          if (k == 0 || v > hi) hi = v, hi_at = flat;
        }
        if (hi - lo > result.max_variation) {
          result.max_variation = hi - lo;
          grid.coordinates(hi_at == start ? lo_at : hi_at, coords);
          result.worst_point.assign(coords.begin(), coords.end());
          result.worst_time = t;
        }
      }
    }
    result.passed = result.max_variation < kIndependenceTolerance;
    report.passed = report.passed && result.passed;
    report.axes.push_back(std::move(result));
  }
  return report;
}

namespace {

/// Visits every point of the grid refined `oversample` times per axis.
void for_each_refined_point(const GridSpec& grid, int oversample,
                            const std::function<void(std::span<const double>)>& visit) {
  if (oversample < 1) throw Error(ErrorCode::invalid_argument, "oversample must be >= 1");
  std::array<std::size_t, 3> counts{};
  std::size_t total = 1;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    counts[axis] = grid.points(axis) * static_cast<std::size_t>(oversample);
    total *= counts[axis];
  }
  std::array<double, 3> x{};
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int axis = grid.dim() - 1; axis >= 0; --axis) {
      x[axis] = static_cast<double>(rest % counts[axis]) / static_cast<double>(counts[axis]);
      rest /= counts[axis];
    }
    visit(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim())));
  }
}

double max_abs_over(const GridSpec& grid, TimeWindow window, int oversample,
                    const std::function<double(std::span<const double>, double)>& value) {
  double best = 0.0;
  for (double t : sample_times(window)) {
    for_each_refined_point(grid, oversample, [&](std::span<const double> x) {
      best = std::max(best, std::fabs(value(x, t)));
    });
  }
  return best;
}

/// Central difference of order 1 or 2 with step h, Richardson-extrapolated once.
double richardson(const std::function<double(double)>& shifted, int order, double h) {
  auto central = [&](double step) {
    if (order == 1) return (shifted(step) - shifted(-step)) / (2.0 * step);
    return (shifted(step) - 2.0 * shifted(0.0) + shifted(-step)) / (step * step);
  };
  const double coarse = central(h);
  const double fine = central(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace

double min_value(const Expr& expr, const GridSpec& grid, TimeWindow window, int oversample) {
  double best = 0.0;
  bool first = true;
  for (double t : sample_times(window)) {
    for_each_refined_point(grid, oversample, [&](std::span<const double> x) {
      const double v = expr.evaluate(x, t);
      if (first || v < best) best = v, first = false;
    });
  }
  return best;
}

double sup_norm(const Expr& expr, const GridSpec& grid, TimeWindow window, int oversample) {
  return max_abs_over(grid, window, oversample,
                      [&](std::span<const double> x, double t) { return expr.evaluate(x, t); });
}

double partial_sup_norm(const Expr& expr, int axis, int order, const GridSpec& grid,
                        TimeWindow window, int oversample) {
  if (axis < 0 || axis >= grid.dim()) throw Error(ErrorCode::invalid_argument, "axis out of range");
  if (order != 1 && order != 2) throw Error(ErrorCode::invalid_argument, "derivative order must be 1 or 2");
  if (!expr.uses_axis(axis)) return 0.0;
  const double h = std::ldexp(1.0, -(grid.qubits(axis) + 4));
  return max_abs_over(grid, window, oversample, [&](std::span<const double> x, double t) {
    std::array<double, 3> moved{};
    std::copy(x.begin(), x.end(), moved.begin());
    const std::span<const double> view(moved.data(), x.size());
    return richardson(
        [&](double dx) {
          moved[axis] = x[axis] + dx;
          return expr.evaluate(view, t);
        },
        order, h);
  });
}

double time_partial_sup_norm(const Expr& expr, const GridSpec& grid, TimeWindow window,
                             int oversample) {
  if (!expr.depends_on_time()) return 0.0;
  const double h = std::ldexp(1.0, -12);
  return max_abs_over(grid, window, oversample, [&](std::span<const double> x, double t) {
    return richardson([&](double dt) { return expr.evaluate(x, t + dt); }, 1, h);
  });
}

double time_integral(const Expr& expr, std::span<const double> point, double t0, double t1) {
  if (t1 < t0) throw Error(ErrorCode::invalid_argument, "time_integral requires t0 <= t1");
  if (!expr.depends_on_time()) return (t1 - t0) * expr.evaluate(point, t0);
  // Gauss-Legendre nodes and weights on [-1, 1]
  static constexpr std::array<double, 4> nodes{-0.8611363115940526, -0.3399810435848563,
                                               0.3399810435848563, 0.8611363115940526};
  static constexpr std::array<double, 4> weights{0.3478548451374538, 0.6521451548625461,
                                                 0.6521451548625461, 0.3478548451374538};
  const double half = 0.5 * (t1 - t0);
  const double mid = 0.5 * (t0 + t1);
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    sum += weights[i] * expr.evaluate(point, mid + half * nodes[i]);
  }
  return half * sum;
}

}  // namespace qsplit
