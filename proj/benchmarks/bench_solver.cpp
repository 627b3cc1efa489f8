#include "multistitch/prune_align.hpp"
#include "multistitch/solver.hpp"
#include "multistitch/synth.hpp"

#include <benchmark/benchmark.h>

namespace ms = multistitch;

namespace {

ms::SyntheticGraph grid_graph(int side) {
  ms::SyntheticGraphSpec spec;
  spec.rows = side;
  spec.cols = side;
  spec.seed = 3;
  return ms::synthetic_grid_graph(spec);
}

void BM_SolveLm(benchmark::State& state) {
  const auto sg = grid_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ms::solve(sg.graph));
  state.counters["bundles"] = static_cast<double>(sg.graph.num_bundles());
}
BENCHMARK(BM_SolveLm)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SolveGd(benchmark::State& state) {
  const auto sg = grid_graph(static_cast<int>(state.range(0)));
  ms::SolverConfig c;
  c.mode = ms::SolverMode::GradientDescent;
  for (auto _ : state) benchmark::DoNotOptimize(ms::solve(sg.graph, c));
}
BENCHMARK(BM_SolveGd)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_GlobalAlign(benchmark::State& state) {
  auto g = grid_graph(static_cast<int>(state.range(0))).graph;
  ms::apply_solution(g, ms::solve(g));
  const auto simple = ms::prune(g);
  for (auto _ : state) benchmark::DoNotOptimize(ms::global_align(simple));
}
BENCHMARK(BM_GlobalAlign)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

}  // namespace
