#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nesy/agent/policy.hpp"
#include "nesy/bridge/feature_map.hpp"
#include "nesy/envs/doorkey.hpp"
#include "nesy/logic/evaluator.hpp"
#include "nesy/neural/qnetwork.hpp"

using namespace nesy;

namespace {

logic::Program doorkey_policy() {
  std::ifstream in(std::filesystem::path(NESY_SOURCE_DIR) / "policies" / "doorkey.lp");
  std::stringstream ss;
  ss << in.rdbuf();
  return logic::parse_program(ss.str());
}

envs::doorkey::DoorKeyEnv doorkey_env(int n, int keys) {
  envs::EnvConfig c;
  c.grid_size = n;
  c.num_keys = keys;
  envs::doorkey::DoorKeyEnv env(envs::normalized(c));
  env.reset(1);
  return env;
}

void BM_ExtractFacts(benchmark::State& state) {
  const auto env = doorkey_env(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(bridge::extract_facts(env.state()));
}
BENCHMARK(BM_ExtractFacts)->Arg(8)->Arg(16);

void BM_SuggestPrecomputed(benchmark::State& state) {
  const bridge::PolicyAdvisor advisor(doorkey_policy(), bridge::builtin_bridge("doorkey"),
                                      bridge::PolicyAdvisor::Grounding::Precomputed);
  const auto facts = bridge::extract_facts(doorkey_env(8, 2).state());
  for (auto _ : state) benchmark::DoNotOptimize(advisor.suggest(facts));
}
BENCHMARK(BM_SuggestPrecomputed);

void BM_SuggestOnTheFly(benchmark::State& state) {
  const bridge::PolicyAdvisor advisor(doorkey_policy(), bridge::builtin_bridge("doorkey"),
                                      bridge::PolicyAdvisor::Grounding::OnTheFly);
  const auto facts = bridge::extract_facts(doorkey_env(8, 2).state());
  for (auto _ : state) benchmark::DoNotOptimize(advisor.suggest(facts));
}
BENCHMARK(BM_SuggestOnTheFly);

void BM_Forward(benchmark::State& state) {
  const neural::QNetwork net({envs::doorkey::kObservationSize, 128, 128, 5}, 0);
  const auto env = doorkey_env(8, 1);
  std::vector<double> x(env.observation_size());
  env.encode_observation(x);
  const auto f = neural::sparse_features(x);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(f));
}
BENCHMARK(BM_Forward);

void BM_TrainStep(benchmark::State& state) {
  neural::QNetwork net({envs::doorkey::kObservationSize, 128, 128, 5}, 0);
  const neural::QNetwork target = net;
  neural::Adam opt(net.parameter_count(), {});
  auto env = doorkey_env(8, 1);
  auto rng = agent::make_rng(0, 1);
  std::vector<neural::Transition> batch;
  std::vector<double> x(env.observation_size());
  while (batch.size() < static_cast<std::size_t>(state.range(0))) {
    env.encode_observation(x);
    auto s = neural::sparse_features(x);
    const int a = agent::uniform_index(rng, env.action_count());
    const auto r = env.step(a);
    env.encode_observation(x);
    batch.push_back({std::move(s), a, r.reward, neural::sparse_features(x), r.terminal});
    if (env.terminal()) env.reset(batch.size());
  }
  for (auto _ : state) benchmark::DoNotOptimize(neural::train_step(net, target, batch, 0.99, opt));
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(64);

void BM_EnvStep(benchmark::State& state) {
  auto env = doorkey_env(8, 2);
  auto rng = agent::make_rng(0, 1);
  std::uint64_t episode = 0;
  for (auto _ : state) {
    if (env.terminal()) env.reset(++episode);
    benchmark::DoNotOptimize(env.step(agent::uniform_index(rng, env.action_count())));
  }
}
BENCHMARK(BM_EnvStep);

}  // namespace

BENCHMARK_MAIN();
