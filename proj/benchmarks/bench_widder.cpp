#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "heatlab/scenario.hpp"
#include "heatlab/semigroup.hpp"
#include "heatlab/solutions.hpp"
#include "heatlab/space.hpp"
#include "heatlab/widder.hpp"

using namespace heatlab;

namespace {

std::vector<double> decompose_grid(const std::vector<double>& eps) {
  std::vector<double> ts;
  for (int i = 0; i < 40; ++i) ts.push_back(1e-4 * std::pow(2e4, i / 39.0));
  for (double e : eps) ts.push_back(e);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

}  // namespace

static void BM_WidderLocal(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DirichletSpace space = random_connected_space(21, n, 0.1);
  HeatEngine engine(space);
  const std::vector<double> eps = {4e-4, 2e-4, 1e-4};
  SpaceTimeFunction u =
      sample_semigroup_measure(engine, decompose_grid(eps), AtomicMeasure::dirac(n, 0));
  Subdomain full = Subdomain::full(space);
  for (auto _ : state)
    benchmark::DoNotOptimize(widder_local_decompose(engine, u, full, eps));
  state.SetComplexityN(n);
}
BENCHMARK(BM_WidderLocal)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void BM_SolutionResidual(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DirichletSpace space = random_connected_space(22, n, 0.1);
  HeatEngine engine(space);
  SpaceTimeFunction u =
      sample_semigroup_measure(engine, decompose_grid({}), AtomicMeasure::dirac(n, 0));
  for (auto _ : state) benchmark::DoNotOptimize(solution_residual(space, u));
  state.SetComplexityN(n);
}
BENCHMARK(BM_SolutionResidual)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void BM_HarnackFamily(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DirichletSpace space = build_cycle(n);
  HeatEngine engine(space);
  HarnackWindow window{0.25, 0.5, 0.75, 1.0, {0, 1}};
  for (auto _ : state)
    benchmark::DoNotOptimize(harnack_family_constant(engine, window, 17));
}
BENCHMARK(BM_HarnackFamily)->RangeMultiplier(2)->Range(8, 64);

BENCHMARK_MAIN();
