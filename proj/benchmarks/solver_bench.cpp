#include <benchmark/benchmark.h>

#include "pickroute/exact_solver.hpp"
#include "pickroute/heuristics.hpp"
#include "pickroute/warehouse.hpp"

namespace {

using namespace pickroute;

AisleSequence sequence_for(int aisles, int items) {
  return to_aisle_sequence(generate_instance({aisles, items, DistributionMode::kNormal}, 7));
}

void BM_SolveOptimal(benchmark::State& state) {
  const auto seq = sequence_for(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_optimal(seq).length);
}
BENCHMARK(BM_SolveOptimal)->Args({5, 30})->Args({15, 60})->Args({30, 90});

void BM_Heuristic(benchmark::State& state) {
  const auto kind = static_cast<HeuristicKind>(state.range(0));
  const auto seq = sequence_for(30, 90);
  for (auto _ : state) benchmark::DoNotOptimize(run_heuristic(kind, seq).total_length);
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_Heuristic)->DenseRange(0, 3);

void BM_BruteForce(benchmark::State& state) {
  const auto inst = generate_instance(
      {4, static_cast<int>(state.range(0)), DistributionMode::kUniform}, 11);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_tsp(inst));
}
BENCHMARK(BM_BruteForce)->Arg(6)->Arg(8)->Arg(10);

}  // namespace
