#include "nes/experiment.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace nes;

Experiment figure(const char* name) { return build_experiment(preset(name)); }

void BM_FieldEval(benchmark::State& state, const char* name) {
  const Experiment ex = figure(name);
  StrategyState s = ex.initial;
  s.values().setConstant(0.3);
  for (auto _ : state) benchmark::DoNotOptimize(ex.field(s));
}
BENCHMARK_CAPTURE(BM_FieldEval, sat_gradient_play, "fig2");
BENCHMARK_CAPTURE(BM_FieldEval, first_order_dist, "fig3");
BENCHMARK_CAPTURE(BM_FieldEval, second_order_dist_sat, "fig4");

void BM_Rk4Steps(benchmark::State& state) {
  const Experiment ex = figure("fig3");
  SimConfig cfg = ex.config.sim;
  cfg.t_end = cfg.dt * 1000;
  cfg.record_stride = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(ex.field, ex.initial, cfg));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Rk4Steps);

void BM_LyapunovSolve(benchmark::State& state) {
  const Index n = state.range(0);
  const EstimationMatrix m = estimation_matrix(CommGraph::path(n), 2);
  const Vector w = Vector::Ones(m.size());
  const Matrix q = Matrix::Identity(m.size(), m.size());
  for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov(m, w, q));
}
BENCHMARK(BM_LyapunovSolve)->Arg(3)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
