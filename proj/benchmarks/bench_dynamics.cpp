#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "qconserve/dynamics.hpp"
#include "qconserve/scenarios.hpp"

using namespace qconserve;

static void BM_SplitStepFree(benchmark::State& state) {
  const GridSpec grid{static_cast<std::size_t>(state.range(0)), 200.0, true};
  const auto psi = gaussian_packet(grid, 1.0);
  const RealVector v = RealVector::Zero(static_cast<Eigen::Index>(grid.points));
  for (auto _ : state) benchmark::DoNotOptimize(evolve_split_step(1.0, v, psi, 1.0, 64));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_SplitStepFree)->RangeMultiplier(4)->Range(256, 16384)->Unit(benchmark::kMillisecond);

static void BM_SplitStepHarmonic(benchmark::State& state) {
  const GridSpec grid{4096, 40.0, true};
  const auto psi = gaussian_packet(grid, 1.0, 2.0);
  RealVector v(static_cast<Eigen::Index>(grid.points));
  for (std::size_t j = 0; j < grid.points; ++j) v[static_cast<Eigen::Index>(j)] = 0.5 * std::pow(grid.coordinate(j), 2);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_split_step(1.0, v, psi, 1.0, state.range(0)));
}
BENCHMARK(BM_SplitStepHarmonic)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_SpectralPropagatorBuild(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n * n; ++i) m.data()[i] = Complex(g(rng), g(rng));
  const SpaceLayout l({Factor::discrete("s", static_cast<std::size_t>(n))});
  const auto h = HermitianOperator::dense(l, 0.5 * (m + m.adjoint()));
  for (auto _ : state) benchmark::DoNotOptimize(SpectralPropagator(h, l));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SpectralPropagatorBuild)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNCubed);

static void BM_MachZehnder(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(run_mach_zehnder(MachZehnderSpec{}));
}
BENCHMARK(BM_MachZehnder)->Unit(benchmark::kMillisecond);

static void BM_SternGerlach(benchmark::State& state) {
  SternGerlachSpec spec;
  spec.particle_mode_dim = static_cast<std::size_t>(state.range(0));
  spec.apparatus_mode_dim = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_stern_gerlach(spec));
}
BENCHMARK(BM_SternGerlach)->Arg(7)->Arg(21)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
