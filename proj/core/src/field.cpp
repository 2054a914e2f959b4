#include "qsplit/field.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "fourier.hpp"
#include "qsplit/error.hpp"

namespace qsplit {

Field::Field(GridSpec grid, std::vector<Complex> amplitudes, double time)
    : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)), time_(time) {
  if (amplitudes_.size() != grid_.size()) {
    throw Error(ErrorCode::invalid_argument,
                "field has " + std::to_string(amplitudes_.size()) + " amplitudes for a grid of " +
                    std::to_string(grid_.size()));
  }
  if (!all_finite()) throw Error(ErrorCode::invalid_argument, "field amplitudes must be finite");
}

Field Field::zeros(const GridSpec& grid, double time) {
  return Field(grid, std::vector<Complex>(grid.size()), time);
}

Field Field::constant(const GridSpec& grid, Complex value, double time) {
  return Field(grid, std::vector<Complex>(grid.size(), value), time);
}

bool Field::all_finite() const {
  for (const auto& a : amplitudes_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
  }
  return true;
}

Field sample_function(const GridSpec& grid, const Expr& expr, double t) {
  std::vector<Complex> values(grid.size());
  std::array<double, 3> x{};
  const std::span<double> coords(x.data(), static_cast<std::size_t>(grid.dim()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.coordinates(i, coords);
    values[i] = expr.evaluate(coords, t);
  }
  return Field(grid, std::move(values), t);
}

double scaled_norm(std::span<const Complex> amplitudes) {
  if (amplitudes.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& a : amplitudes) sum += std::norm(a);
  return std::sqrt(sum / static_cast<double>(amplitudes.size()));
}

double scaled_norm(const Field& field) { return scaled_norm(field.amplitudes()); }

Field normalize(const Field& field) {
  const double norm = scaled_norm(field);
  if (!(norm > 0.0)) throw Error(ErrorCode::degenerate_state, "cannot normalize the zero field");
  Field out = field;
  for (auto& a : out.amplitudes()) a /= norm;
  return out;
}

namespace {

void check_axis(const GridSpec& grid, int axis) {
  if (axis < 0 || axis >= grid.dim()) {
    throw Error(ErrorCode::invalid_argument, "axis " + std::to_string(axis) +
                                                 " out of range for dimension " +
                                                 std::to_string(grid.dim()));
  }
}

}  // namespace

void axis_fourier_inplace(std::span<Complex> amplitudes, const GridSpec& grid, int axis,
                          FourierDirection direction) {
  check_axis(grid, axis);
  detail::fourier_along_axis(amplitudes, grid, axis,
                             direction == FourierDirection::forward ? detail::Direction::forward
                                                                    : detail::Direction::inverse);
}

Field axis_fourier(const Field& field, int axis, FourierDirection direction) {
  Field out = field;
  axis_fourier_inplace(out.amplitudes(), out.grid(), axis, direction);
  return out;
}

long signed_frequency(std::size_t k, std::size_t points) {
  const auto n = static_cast<long>(points);
  const auto m = static_cast<long>(k);
  return m <= n / 2 ? m : m - n;
}

Field spectral_derivative(const Field& field, int axis, int order) {
  const GridSpec& grid = field.grid();
  check_axis(grid, axis);
  if (order != 1 && order != 2) throw Error(ErrorCode::invalid_argument, "derivative order must be 1 or 2");

  const std::size_t n = grid.points(axis);
  std::vector<Complex> multiplier(n);
  for (std::size_t k = 0; k < n; ++k) {
    const long m = signed_frequency(k, n);
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(m);
    if (order == 1) {
      multiplier[k] = (2 * m == static_cast<long>(n)) ? Complex{} : Complex(0.0, omega);
    } else {
      multiplier[k] = -omega * omega;
    }
  }

  Field out = axis_fourier(field, axis, FourierDirection::forward);
  const std::size_t stride = grid.stride(axis);
  auto amps = out.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= multiplier[(i / stride) % n];
  axis_fourier_inplace(amps, grid, axis, FourierDirection::inverse);
  return out;
}

Complex measure(const Field& field, const Observable& observable) {
  const GridSpec& grid = field.grid();
  switch (observable.kind) {
    case Observable::Kind::point_value: {
      if (static_cast<int>(observable.point.size()) != grid.dim()) {
        throw Error(ErrorCode::invalid_argument, "point observable has wrong dimension");
      }
      std::array<std::size_t, 3> index{};
      for (int axis = 0; axis < grid.dim(); ++axis) {
        const double scaled = observable.point[axis] * static_cast<double>(grid.points(axis));
        const double rounded = std::round(scaled);
        if (std::fabs(scaled - rounded) > 1e-9 || rounded < 0.0 ||
            rounded >= static_cast<double>(grid.points(axis))) {
          throw Error(ErrorCode::invalid_argument, "point observable is not a grid node");
        }
        index[axis] = static_cast<std::size_t>(rounded);
      }
      return field[grid.ravel(std::span<const std::size_t>(index.data(), grid.dim()))];
    }
    case Observable::Kind::mean: {
      Complex sum{};
      for (const auto& a : field.amplitudes()) sum += a;
      return sum / static_cast<double>(field.size());
    }
    case Observable::Kind::axis_moment: {
      check_axis(grid, observable.axis);
      const std::size_t n = grid.points(observable.axis);
      const std::size_t stride = grid.stride(observable.axis);
      double weighted = 0.0;
      double total = 0.0;
      for (std::size_t i = 0; i < field.size(); ++i) {
        const double x = static_cast<double>((i / stride) % n) / static_cast<double>(n);
        const double w = std::norm(field[i]);
        weighted += std::pow(x, observable.order) * w;
        total += w;
      }
      if (!(total > 0.0)) throw Error(ErrorCode::degenerate_state, "moment of the zero field");
      return weighted / total;
    }
    case Observable::Kind::scaled_norm:
      return scaled_norm(field);
  }
  return {};
}

double distance(const Field& a, const Field& b, bool normalized) {
  if (!(a.grid() == b.grid())) throw Error(ErrorCode::grid_mismatch, "distance between fields on different grids");
  const double na = normalized ? scaled_norm(a) : 1.0;
  const double nb = normalized ? scaled_norm(b) : 1.0;
  if (normalized && (!(na > 0.0) || !(nb > 0.0))) {
    throw Error(ErrorCode::degenerate_state, "cannot normalize the zero field");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::norm(a[i] / na - b[i] / nb);
  return std::sqrt(sum / static_cast<double>(a.size()));
}

namespace {

void append_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

double parse_double(const std::string& cell) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw Error(ErrorCode::invalid_argument, "malformed CSV number '" + cell + "'");
  }
  return v;
}

}  // namespace

void write_field_csv(std::ostream& out, const Field& field) {
  const GridSpec& grid = field.grid();
  std::string text;
  for (int axis = 0; axis < grid.dim(); ++axis) text += "i" + std::to_string(axis + 1) + ",";
  text += "re,im\n";
  std::array<std::size_t, 3> index{};
  for (std::size_t i = 0; i < field.size(); ++i) {
    grid.unravel(i, std::span<std::size_t>(index.data(), grid.dim()));
    for (int axis = 0; axis < grid.dim(); ++axis) text += std::to_string(index[axis]) + ",";
    append_double(text, field[i].real());
    text += ',';
    append_double(text, field[i].imag());
    text += '\n';
  }
  out << text;
}

Field read_field_csv(std::istream& in, const GridSpec& grid) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::invalid_argument, "empty field CSV");
  std::vector<Complex> values(grid.size());
  std::vector<bool> seen(grid.size(), false);
  std::size_t rows = 0;
  std::array<std::size_t, 3> index{};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    for (int axis = 0; axis < grid.dim(); ++axis) {
      if (!std::getline(row, cell, ',')) throw Error(ErrorCode::invalid_argument, "short CSV row");
      index[axis] = std::stoul(cell);
      if (index[axis] >= grid.points(axis)) throw Error(ErrorCode::invalid_argument, "CSV index out of range");
    }
    double re = 0.0;
    double im = 0.0;
    if (!std::getline(row, cell, ',')) throw Error(ErrorCode::invalid_argument, "missing re column");
    re = parse_double(cell);
    if (!std::getline(row, cell, ',')) throw Error(ErrorCode::invalid_argument, "missing im column");
    im = parse_double(cell);
    const std::size_t flat = grid.ravel(std::span<const std::size_t>(index.data(), grid.dim()));
    if (seen[flat]) throw Error(ErrorCode::invalid_argument, "duplicate CSV row");
    values[flat] = {re, im};
    seen[flat] = true;
    ++rows;
  }
  if (rows != grid.size()) throw Error(ErrorCode::invalid_argument, "CSV row count does not match the grid");
  return Field(grid, std::move(values));
}

}  // namespace qsplit
