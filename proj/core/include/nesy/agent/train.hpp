#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nesy/agent/policy.hpp"
#include "nesy/bridge/feature_map.hpp"
#include "nesy/envs/environment.hpp"
#include "nesy/neural/qnetwork.hpp"

namespace nesy::agent {

enum class Variant { DQN, SRDQN, SRExploration, SRExploitation, RMDQN };

/// "dqn", "sr-dqn", "sr-exploration", "sr-exploitation", "rm-dqn".
std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);
bool uses_sr_exploration(Variant v);
bool uses_sr_exploitation(Variant v);

/// Extra observation channels and shaped reward layered over an environment
/// (the reward-machine product). The agent calls reset() after every env
/// reset, before_step()/after_step() around every env step.
class Augmenter {
 public:
  virtual ~Augmenter() = default;
  virtual std::size_t extra_features() const = 0;
  virtual void reset(const envs::Environment& env) = 0;
  virtual void before_step(const envs::Environment& env) = 0;
  /// Returns the shaping bonus for the step just taken.
  virtual double after_step(const envs::Environment& env, int action, const envs::StepResult& result) = 0;
  /// Appends active extra feature indices, offset by `base`.
  virtual void append_features(neural::Features& features, std::uint32_t base) const = 0;
  virtual std::unique_ptr<Augmenter> clone() const = 0;
};

struct Hyperparameters {
  double gamma = 0.99;
  std::vector<std::size_t> hidden{128, 128};
  neural::AdamConfig adam;
  std::size_t replay_capacity = 100000;
  std::size_t batch_size = 64;
  std::size_t learning_starts = 1000;
  std::size_t train_frequency = 4;
  std::size_t target_sync = 1000;
  std::uint64_t max_total_steps = 100000;
  std::uint64_t max_episodes = 0;  ///< 0: no episode cap
};

struct GuidanceConfig {
  double rho = 0.8;
  WeightMode rescale_weights = WeightMode::Raw;
};

struct TrainConfig {
  Variant variant = Variant::DQN;
  envs::EnvConfig env;
  EpsilonSchedule schedule;
  GuidanceConfig guidance;
  Hyperparameters hyper;
  bool record_timing = true;
};

struct EpisodeRecord {
  int episode = 0;
  int steps = 0;
  double ret = 0.0;
  double discounted_return = 0.0;
  bool success = false;
  double epsilon = 0.0;
  double loss_mean = 0.0;
  double neural_ms_per_step = 0.0;
  double symbolic_ms_per_step = 0.0;
  std::uint64_t total_steps = 0;  ///< cumulative environment steps at episode end
};

struct RunMetrics {
  std::vector<EpisodeRecord> episodes;
  std::uint64_t total_steps = 0;
  std::uint64_t explore_steps = 0;
  std::uint64_t negative_rescales = 0;
  double wall_seconds = 0.0;
  double neural_seconds = 0.0;
  double symbolic_seconds = 0.0;
  neural::QNetwork network;
};

/// Per-episode hook, e.g. progress output. Must not mutate shared state.
using EpisodeCallback = std::function<void(const EpisodeRecord&)>;

/// Episodic epsilon-greedy deep Q-learning. Each step draws x ~ U[0, 1):
/// x >= eps exploits (argmax or sr_exploit), otherwise explores (uniform or
/// sr_explore); epsilon follows `schedule` per episode and stays at eps_f
/// once decayed. Stops after hyper.max_total_steps steps (or
/// hyper.max_episodes episodes when set); an episode cut by the step budget
/// is not recorded. SR variants need `advisor`; RM-DQN
/// needs `augmenter`. Time-limit truncation does not cut bootstrapping.
RunMetrics train(const TrainConfig& config, std::uint64_t seed, const bridge::PolicyAdvisor* advisor = nullptr,
                 Augmenter* augmenter = nullptr, const EpisodeCallback& on_episode = {});

struct EvalResult {
  double mean = 0.0;
  double stddev = 0.0;
  double success_rate = 0.0;
  std::vector<double> returns;
};

/// Greedy rollouts (no exploration, no symbolic rescale) scored by the
/// discounted return sum_t gamma^t r_t.
EvalResult evaluate(const neural::QNetwork& net, const envs::EnvConfig& env, int episodes, double gamma,
                    std::uint64_t seed, Augmenter* augmenter = nullptr);

/// Same protocol for an arbitrary policy over the environment.
EvalResult evaluate_policy(const std::function<int(const envs::Environment&)>& policy, const envs::EnvConfig& env,
                           int episodes, double gamma, std::uint64_t seed);

/// Encodes the environment (plus augmenter channels) as sparse binary features.
neural::Features observe(const envs::Environment& env, const Augmenter* augmenter = nullptr);

/// CSV with header episode,steps,return,discounted_return,success,epsilon,
/// loss_mean,neural_ms_per_step,symbolic_ms_per_step. Timing columns are
/// written as 0 when `with_timing` is false so reruns compare byte for byte.
void write_metrics_csv(const std::filesystem::path& path, const RunMetrics& metrics, bool with_timing);
std::vector<EpisodeRecord> read_metrics_csv(const std::filesystem::path& path);

}  // namespace nesy::agent
