#include <benchmark/benchmark.h>

#include <random>

#include "qconserve/measurement.hpp"

using namespace qconserve;

static StateVector random_grid_state(const GridSpec& grid) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  ComplexVector v(static_cast<Eigen::Index>(grid.points));
  for (auto& z : v) z = Complex(n(rng), n(rng));
  return StateVector(SpaceLayout({Factor::on_grid("x", grid)}), v).normalized();
}

static void BM_WindowMeasure(benchmark::State& state) {
  const GridSpec grid{static_cast<std::size_t>(state.range(0)), 100.0, true};
  const auto psi = random_grid_state(grid);
  const auto ps = window_projector(grid, -5.0, 5.0, psi.layout(), "x");
  for (auto _ : state) benchmark::DoNotOptimize(measure(psi, ps));
}
BENCHMARK(BM_WindowMeasure)->RangeMultiplier(4)->Range(256, 16384);

static void BM_MomentumAudit(benchmark::State& state) {
  const GridSpec grid{static_cast<std::size_t>(state.range(0)), 100.0, true};
  const auto psi = random_grid_state(grid);
  const auto ps = window_projector(grid, -5.0, 5.0, psi.layout(), "x");
  const auto p = momentum_function(grid, [](double k) { return k; }).on("x");
  for (auto _ : state) benchmark::DoNotOptimize(total_expectation_audit(psi, ps, p));
}
BENCHMARK(BM_MomentumAudit)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

static void BM_SampleOutcome(benchmark::State& state) {
  const auto ps = basis_projectors(16, {"0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "a", "b", "c", "d", "e", "f"});
  const SpaceLayout l({Factor::discrete("q", 16)});
  const auto branches = measure(StateVector(l, ComplexVector::Constant(16, Complex(0.25, 0.0))), ps);
  std::mt19937_64 rng(11);
  for (auto _ : state) benchmark::DoNotOptimize(sample_outcome(branches, rng));
}
BENCHMARK(BM_SampleOutcome);

BENCHMARK_MAIN();
