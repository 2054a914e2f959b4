#include "qsplit/grid.hpp"

#include <string>

#include "qsplit/error.hpp"

namespace qsplit {

GridSpec::GridSpec(std::vector<int> qubits, std::size_t max_points) : qubits_(std::move(qubits)) {
  if (qubits_.empty() || qubits_.size() > 3) {
    throw Error(ErrorCode::invalid_argument, "grid dimension must be 1, 2 or 3");
  }
  int total = 0;
  for (int n : qubits_) {
    if (n < 1 || n > 24) {
      throw Error(ErrorCode::invalid_argument, "qubits per axis must lie in [1, 24], got " + std::to_string(n));
    }
    total += n;
  }
  if (total > 62 || (std::size_t{1} << total) > max_points) {
    throw Error(ErrorCode::size_guard, "grid of 2^" + std::to_string(total) +
                                           " points exceeds the memory guard of " +
                                           std::to_string(max_points));
  }
  size_ = std::size_t{1} << total;
  strides_.assign(qubits_.size(), 1);
  for (int axis = dim() - 2; axis >= 0; --axis) {
    strides_[axis] = strides_[axis + 1] * points(axis + 1);
  }
}

int GridSpec::total_qubits() const {
  int total = 0;
  for (int n : qubits_) total += n;
  return total;
}

void GridSpec::unravel(std::size_t flat, std::span<std::size_t> out) const {
  for (int axis = 0; axis < dim(); ++axis) {
    out[axis] = (flat / strides_[axis]) % points(axis);
  }
}

std::size_t GridSpec::ravel(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (int axis = 0; axis < dim(); ++axis) flat += index[axis] * strides_[axis];
  return flat;
}

void GridSpec::coordinates(std::size_t flat, std::span<double> out) const {
  for (int axis = 0; axis < dim(); ++axis) {
    out[axis] = static_cast<double>((flat / strides_[axis]) % points(axis)) * spacing(axis);
  }
}

std::size_t GridSpec::line_start(int axis, std::size_t line) const {
  // lines enumerate every combination of the other axes; split into the part
  // slower than `axis` (outer) and faster (inner)
  const std::size_t inner = strides_[axis];
  const std::size_t outer = line / inner;
  const std::size_t offset = line % inner;
  return outer * inner * points(axis) + offset;
}

}  // namespace qsplit
