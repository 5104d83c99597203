#include <benchmark/benchmark.h>

#include <memory>

#include "ahtlab/dqn.hpp"
#include "ahtlab/game.hpp"
#include "ahtlab/model.hpp"
#include "ahtlab/network.hpp"
#include "ahtlab/policies.hpp"
#include "ahtlab/sim.hpp"

namespace {

using namespace ahtlab;

// Three hypotheses, four binary queries.
ObservationModel bench_model() {
  return ObservationModel({
      {{0.5, 0.5}, {0.5, 0.5}, {0.9, 0.1}, {0.9, 0.1}},
      {{0.9, 0.1}, {0.5, 0.5}, {0.1, 0.9}, {0.9, 0.1}},
      {{0.5, 0.5}, {0.9, 0.1}, {0.9, 0.1}, {0.1, 0.9}},
  });
}

void BM_BayesUpdate(benchmark::State& state) {
  const auto m = bench_model();
  Belief b = Belief::uniform(3);
  std::size_t y = 0;
  for (auto _ : state) {
    b = bayes_update(b, 2, y, m);
    y ^= 1;
    benchmark::DoNotOptimize(b);
  }
}
BENCHMARK(BM_BayesUpdate);

void BM_EjsSelect(benchmark::State& state) {
  const auto m = bench_model();
  const auto b = Belief::from_probabilities(std::vector<double>{0.6, 0.3, 0.1});
  for (auto _ : state) benchmark::DoNotOptimize(ejs_select(b, m));
}
BENCHMARK(BM_EjsSelect);

void BM_Forward(benchmark::State& state) {
  Rng rng(1);
  const auto width = static_cast<std::size_t>(state.range(0));
  const auto net = QNetwork::random({6, width, width, 4}, rng);
  const auto x = augment(Belief::from_probabilities(std::vector<double>{0.6, 0.3, 0.1}));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_Forward)->Arg(16)->Arg(64)->Arg(256);

void BM_SolveZeroSum(benchmark::State& state) {
  const auto m = bench_model();
  SolverOptions opt;
  opt.method = state.range(0) == 0 ? SolverMethod::simplex : SolverMethod::fictitious_play;
  opt.max_iterations = 100000000;
  opt.tolerance = state.range(0) == 0 ? 1e-4 : 1e-2;
  const auto game = kl_payoff_matrix(m, 0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_zero_sum(game, opt));
}
BENCHMARK(BM_SolveZeroSum)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_RunEpisode(benchmark::State& state) {
  const auto m = bench_model();
  PolicyConfig cfg;
  cfg.kind = static_cast<PolicyKind>(state.range(0));
  const auto policy = make_policy(m, cfg);
  Rng rng(7);
  for (auto _ : state)
    benchmark::DoNotOptimize(run_episode(*policy, m, 0, Belief::uniform(3), 200, rng));
  state.SetLabel(policy->name());
}
BENCHMARK(BM_RunEpisode)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
