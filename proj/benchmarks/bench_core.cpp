#include <benchmark/benchmark.h>

#include <random>

#include "dss/agent.hpp"
#include "dss/env.hpp"
#include "dss/trace.hpp"

using namespace dss;

namespace {

DemandTrace random_trace(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(5.0, 60.0);
  DemandTrace t;
  t.demands.resize(n);
  for (auto& v : t.demands) v = d(rng);
  return t;
}

void BM_OptimalAllocation(benchmark::State& state) {
  RewardParams params;
  params.n_r = 100;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 80.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimal_allocation(d(rng), d(rng), params));
  }
}
BENCHMARK(BM_OptimalAllocation);

void BM_EnvStep(benchmark::State& state) {
  RewardParams params;
  const auto a = random_trace(2000, 1);
  const auto b = random_trace(2000, 2);
  std::size_t t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(step(t, {55, 45}, a, b, params, 4));
    t = (t + 1) % a.size();
  }
}
BENCHMARK(BM_EnvStep);

void BM_CriticUpdate(benchmark::State& state) {
  AgentConfig cfg;
  cfg.seed = 3;
  RewardParams params;
  Td3Agent agent(cfg, params);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<Transition> transitions(std::size_t(cfg.batch_size));
  for (auto& tr : transitions) {
    tr.observation.resize(std::size_t(cfg.observation_dim()));
    for (auto& o : tr.observation) o = d(rng);
    tr.action = d(rng);
    tr.reward = -d(rng);
  }
  std::vector<const Transition*> batch;
  for (auto& tr : transitions) batch.push_back(&tr);
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent.critic_update(batch));
  }
}
BENCHMARK(BM_CriticUpdate);

void BM_SynthesizeTrace(benchmark::State& state) {
  const auto source = random_trace(2000, 7);
  SynthConfig cfg;
  cfg.block_length = 60;
  cfg.noise_scale = 0.1;
  cfg.length = 2000;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(synthesize_trace(source, cfg));
  }
}
BENCHMARK(BM_SynthesizeTrace);

}  // namespace

BENCHMARK_MAIN();
