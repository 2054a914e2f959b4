#include <benchmark/benchmark.h>

#include <random>

#include "qsplit/analysis.hpp"
#include "qsplit/walsh.hpp"

namespace {

using namespace qsplit;

Problem sheared(int n) {
  Problem p;
  p.kind = EquationKind::convection;
  p.coeffs = CoefficientSet::parse(EquationKind::convection, {"1+0.5*sin(2*pi*x2)", "1+0.5*cos(2*pi*x1)"}, 2);
  p.initial = parse_expression("exp(sin(2*pi*x1)+cos(2*pi*x2))", 2);
  p.qubits = {n, n};
  return p;
}

void BM_SplitStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Problem problem = sheared(n);
  const EvolutionPlan plan = problem.plan({n, n}, 1);
  Field field = problem.initial_state(plan.grid);
  for (auto _ : state) {
    field = convection_step(field, 0.0, 1e-3, plan);
    benchmark::DoNotOptimize(field.amplitudes().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(plan.grid.size()));
}
BENCHMARK(BM_SplitStep)->DenseRange(5, 10, 1);

void BM_AxisFourier(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec grid(std::vector<int>{n, n});
  std::vector<Complex> data(grid.size(), Complex(1.0, 0.5));
  for (auto _ : state) {
    axis_fourier_inplace(data, grid, 0, FourierDirection::forward);
    axis_fourier_inplace(data, grid, 0, FourierDirection::inverse);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_AxisFourier)->DenseRange(5, 10, 1);

void BM_Fwht(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> values(std::size_t{1} << m);
  for (auto& v : values) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fwht(values).coefficients.data());
  state.SetItemsProcessed(state.iterations() * static_cast<long>(values.size()));
}
BENCHMARK(BM_Fwht)->DenseRange(8, 20, 4);

void BM_ReferenceStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Problem problem = sheared(n);
  const GridSpec grid(std::vector<int>{n, n});
  const Field start = problem.initial_state(grid);
  for (auto _ : state) {
    const auto ref = reference_evolution(grid, problem.coeffs, 1, 1.0 / 64, start, {1, ReferenceBackend::matrix_free, false});
    benchmark::DoNotOptimize(ref.final_state.amplitudes().data());
  }
}
BENCHMARK(BM_ReferenceStep)->DenseRange(4, 7, 1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
