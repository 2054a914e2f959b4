#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qsplit {

inline constexpr std::size_t kDefaultMaxPoints = std::size_t{1} << 24;

/// Uniform periodic grid on the unit torus [0,1)^d with 2^{n_j} points per axis.
/// Flat index layout is row-major with axis 0 slowest.
class GridSpec {
 public:
  GridSpec() = default;

  /// Throws invalid_argument for d outside 1..3 or n_j < 1, and size_guard
  /// when the total point count exceeds max_points.
  explicit GridSpec(std::vector<int> qubits, std::size_t max_points = kDefaultMaxPoints);

  int dim() const { return static_cast<int>(qubits_.size()); }
  const std::vector<int>& qubits() const { return qubits_; }
  int qubits(int axis) const { return qubits_[static_cast<std::size_t>(axis)]; }
  int total_qubits() const;

  std::size_t points(int axis) const { return std::size_t{1} << qubits_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return 1.0 / static_cast<double>(points(axis)); }
  std::size_t size() const { return size_; }
  /// Distance in flat index between neighbours along `axis`.
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

  /// Per-axis integer indices of a flat index.
  void unravel(std::size_t flat, std::span<std::size_t> out) const;
  std::size_t ravel(std::span<const std::size_t> index) const;
  /// Coordinates x_j = k_j / 2^{n_j} of a flat index.
  void coordinates(std::size_t flat, std::span<double> out) const;

  /// Number of 1-D lines along `axis` (size() / points(axis)).
  std::size_t lines(int axis) const { return size_ / points(axis); }
  /// Flat index of the first element of line `line` along `axis`.
  std::size_t line_start(int axis, std::size_t line) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) { return a.qubits_ == b.qubits_; }

 private:
  std::vector<int> qubits_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

}  // namespace qsplit
