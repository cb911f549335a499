#include <benchmark/benchmark.h>

#include "transq/sim.hpp"
#include "transq/transfer.hpp"

namespace {

transq::TwoStageMdpSpec source_spec() {
  transq::TwoStageMdpSpec spec;
  spec.kappa[1] = 1.2;
  return spec;
}

void BM_TransferredQLearning(benchmark::State& state) {
  const transq::TaskDataset target = transq::sample_trajectories({}, state.range(0), 1, 0);
  const transq::TaskDataset source = transq::sample_trajectories(source_spec(), state.range(1), 2, 1);
  transq::TransferConfig cfg;
  if (state.range(2) == 0) {
    cfg.lambda_src = transq::PenaltyChoice::theory();
    cfg.lambda_0 = transq::PenaltyChoice::theory();
  }
  for (auto _ : state) benchmark::DoNotOptimize(transq::transferred_q_learning(target, {source}, cfg));
}
// Args: n0, source rows, cross-validation on/off.
BENCHMARK(BM_TransferredQLearning)->Args({30, 40, 1})->Args({30, 40, 0})->Args({50, 100, 1})->Unit(benchmark::kMillisecond);

void BM_SingleTaskQLearning(benchmark::State& state) {
  const transq::TaskDataset target = transq::sample_trajectories({}, state.range(0), 1, 0);
  const transq::TransferConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(transq::single_task_q_learning(target, cfg));
}
BENCHMARK(BM_SingleTaskQLearning)->Arg(30)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SampleTrajectories(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(transq::sample_trajectories({}, state.range(0), 3, 0));
}
BENCHMARK(BM_SampleTrajectories)->Arg(200)->Arg(2000);

}  // namespace
