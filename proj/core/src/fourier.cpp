#include "fourier.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

namespace qsplit::detail {

namespace {

using PlanKey = std::tuple<std::vector<int>, int, int>;

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const GridSpec& grid, int axis, int sign) {
    std::lock_guard lock(mutex_);
    PlanKey key{grid.qubits(), axis, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const std::size_t n = grid.points(axis);
    const std::size_t stride = grid.stride(axis);
    fftw_iodim64 dims[1] = {{static_cast<ptrdiff_t>(n), static_cast<ptrdiff_t>(stride),
                             static_cast<ptrdiff_t>(stride)}};
    const std::size_t outer = grid.size() / (n * stride);
    fftw_iodim64 loops[2] = {
        {static_cast<ptrdiff_t>(outer), static_cast<ptrdiff_t>(n * stride),
         static_cast<ptrdiff_t>(n * stride)},
        {static_cast<ptrdiff_t>(stride), 1, 1},
    };
    // FFTW_ESTIMATE never touches the buffer during planning
    std::vector<std::complex<double>> scratch(1);
    auto* buffer = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_guru64_dft(1, dims, 2, loops, buffer, buffer, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(std::move(key), plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fourier_along_axis(std::span<std::complex<double>> data, const GridSpec& grid, int axis,
                        Direction direction) {
  const int sign = direction == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = cache().get(grid, axis, sign);
  auto* buffer = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buffer, buffer);
  const double scale = 1.0 / std::sqrt(static_cast<double>(grid.points(axis)));
  for (auto& v : data) v *= scale;
}

}  // namespace qsplit::detail
