#pragma once

// The emulated register state: complex samples of a function on the torus,
// indexed exactly like the computational basis |x_1>|x_2>...|x_d>.

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "qsplit/expr.hpp"
#include "qsplit/grid.hpp"

namespace qsplit {

using Complex = std::complex<double>;

class Field {
 public:
  Field() = default;
  /// Throws invalid_argument if the amplitude count does not match the grid
  /// or any amplitude is non-finite.
  Field(GridSpec grid, std::vector<Complex> amplitudes, double time = 0.0);

  static Field zeros(const GridSpec& grid, double time = 0.0);
  static Field constant(const GridSpec& grid, Complex value, double time = 0.0);

  const GridSpec& grid() const { return grid_; }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  std::span<Complex> amplitudes() { return amplitudes_; }
  std::size_t size() const { return amplitudes_.size(); }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }
  Complex& operator[](std::size_t i) { return amplitudes_[i]; }

  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  bool all_finite() const;

 private:
  GridSpec grid_;
  std::vector<Complex> amplitudes_;
  double time_ = 0.0;
};

/// Direct sampling of expr at x_j = k_j / 2^{n_j}. Evaluation errors propagate
/// with the offending grid point attached.
Field sample_function(const GridSpec& grid, const Expr& expr, double t = 0.0);

/// sqrt((1/N) sum |a|^2), the discrete L2 norm on the torus.
double scaled_norm(const Field& field);
double scaled_norm(std::span<const Complex> amplitudes);

/// Unit scaled-norm copy. Throws degenerate_state for the zero field.
Field normalize(const Field& field);

enum class FourierDirection { forward, inverse };

/// Unitary DFT along one axis (0-based) applied to every 1-D line.
Field axis_fourier(const Field& field, int axis, FourierDirection direction);
void axis_fourier_inplace(std::span<Complex> amplitudes, const GridSpec& grid, int axis,
                          FourierDirection direction);

/// Signed frequency of DFT index k on an axis of `points` samples, in (-N/2, N/2].
long signed_frequency(std::size_t k, std::size_t points);

/// Exact trigonometric derivative of order 1 or 2 along `axis`.
/// Mode m is multiplied by (2 pi i m)^order; the Nyquist mode gets weight 0
/// for first derivatives.
Field spectral_derivative(const Field& field, int axis, int order);

struct Observable {
  enum class Kind { point_value, mean, axis_moment, scaled_norm };

  Kind kind = Kind::mean;
  std::vector<double> point;  ///< point_value: coordinates (must be grid nodes)
  int axis = 0;               ///< axis_moment: 0-based axis
  int order = 1;              ///< axis_moment: power q

  static Observable point_value(std::vector<double> x) { return {Kind::point_value, std::move(x), 0, 1}; }
  static Observable mean() { return {Kind::mean, {}, 0, 1}; }
  static Observable axis_moment(int axis, int order) { return {Kind::axis_moment, {}, axis, order}; }
  static Observable norm() { return {Kind::scaled_norm, {}, 0, 1}; }
};

/// Exact observable on the emulated state. axis_moment returns
/// sum x_j^q |a|^2 / sum |a|^2 (real part of the result).
Complex measure(const Field& field, const Observable& observable);

/// Scaled norm of a - b; both normalized first when `normalized`.
/// Throws grid_mismatch for different grids.
double distance(const Field& a, const Field& b, bool normalized);

/// CSV snapshot: header "i1,...,id,re,im", one row per amplitude in flat order.
void write_field_csv(std::ostream& out, const Field& field);
Field read_field_csv(std::istream& in, const GridSpec& grid);

}  // namespace qsplit
