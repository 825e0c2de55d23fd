#include <benchmark/benchmark.h>

#include "hca/agents.hpp"
#include "hca/environments.hpp"
#include "hca/identities.hpp"
#include "hca/oracle.hpp"

using namespace hca;

namespace {

void BM_SampleTrajectory(benchmark::State& state) {
  ShortcutConfig sc;
  sc.n = static_cast<std::size_t>(state.range(0));
  const TabularMDP mdp = build_shortcut(sc);
  const SoftmaxPolicy pi(mdp.n_observations, mdp.n_actions);
  RunStreams rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_trajectory(mdp, pi, rng));
}
BENCHMARK(BM_SampleTrajectory)->Arg(5)->Arg(20);

void BM_AgentEpisode(benchmark::State& state) {
  const auto alg = static_cast<Algorithm>(state.range(0));
  DelayedEffectConfig dc;
  dc.noise_std = 1.0;
  const TabularMDP mdp = build_delayed_effect(dc);
  AgentConfig cfg;
  cfg.algorithm = alg;
  cfg.n_step = 3;
  std::tie(cfg.return_lo, cfg.return_hi) = return_range(dc);
  Agent agent(mdp, cfg);
  RunStreams rng(2);
  for (auto _ : state) agent.update(sample_trajectory(mdp, agent.policy, rng));
  state.SetLabel(std::string(to_string(alg)));
}
BENCHMARK(BM_AgentEpisode)->DenseRange(0, 3);

void BM_SolveValues(benchmark::State& state) {
  const TabularMDP mdp = build_shortcut({});
  const SoftmaxPolicy pi(mdp.n_observations, mdp.n_actions);
  for (auto _ : state) benchmark::DoNotOptimize(solve_values(mdp, pi));
}
BENCHMARK(BM_SolveValues);

void BM_ExactStateHindsight(benchmark::State& state) {
  const TabularMDP mdp = build_shortcut({});
  const SoftmaxPolicy pi(mdp.n_observations, mdp.n_actions);
  for (auto _ : state) benchmark::DoNotOptimize(exact_state_hindsight(mdp, pi, 6, 0.9, 3));
}
BENCHMARK(BM_ExactStateHindsight);

void BM_IdentitySuite(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_identity_suite(2019, n, {1.0, 0.9}));
}
BENCHMARK(BM_IdentitySuite)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
