#include "charfem/problems.hpp"
#include "charfem/solver.hpp"

#include <benchmark/benchmark.h>

using namespace charfem;

static void BM_RadauRule(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(radau_rule(p));
}
BENCHMARK(BM_RadauRule)->DenseRange(1, 5);

namespace {

struct Setup {
  Benchmark bm = find_benchmark("traveling_gaussian");
  ReferenceRule rule;
  TimePartition partition;
  Field initial;

  Setup(int p, int elements)
      : rule(radau_rule(p)),
        partition(build_trajectories(MeshSlice::uniform(0.0, 1.0, elements), 1, 0.0, 0.01,
                                     motion_strategy(parse_motion("characteristics", bm.problem, bm.domain),
                                                     bm.problem, bm.domain),
                                     default_basis(rule))),
        initial(initial_field(bm.problem, make_space(MeshSlice::uniform(0.0, 1.0, elements), p))) {}
};

} // namespace

static void BM_AssemblePartition(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_partition(s.partition, s.bm.problem, s.rule, s.initial));
}
BENCHMARK(BM_AssemblePartition)->ArgsProduct({{1, 2, 3}, {64, 256}});

static void BM_SolvePartition(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const PartitionSystem sys = assemble_partition(s.partition, s.bm.problem, s.rule, s.initial);
  for (auto _ : state) benchmark::DoNotOptimize(solve_partition(sys));
}
BENCHMARK(BM_SolvePartition)->ArgsProduct({{1, 2, 3}, {64, 256}});

BENCHMARK_MAIN();
