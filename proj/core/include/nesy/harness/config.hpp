#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nesy/agent/train.hpp"
#include "nesy/envs/environment.hpp"

namespace nesy::harness {

inline constexpr int kSchemaVersion = 1;

struct GuidanceBlock {
  double rho = 0.8;
  std::filesystem::path policy_file;      ///< empty: no logical policy
  std::filesystem::path action_map_file;  ///< empty: built-in table
  bool use_sr_exploration = true;
  bool use_sr_exploitation = true;
  agent::WeightMode rescale_weights = agent::WeightMode::Raw;
  bool precompute_grounding = true;
};

struct RewardMachineBlock {
  std::filesystem::path file;  ///< empty: built-in machine for the task
  double bonus = 0.1;
};

/// One experiment file. Relative paths are resolved against the file's directory.
struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string name = "experiment";
  envs::EnvConfig env;
  std::vector<std::string> algorithms{"dqn", "sr-dqn"};
  agent::EpsilonSchedule schedule;
  GuidanceBlock guidance;
  agent::Hyperparameters network;
  RewardMachineBlock reward_machine;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output_dir = "runs";
  int smoothing_window = 100;
  int final_window = 100;
  bool record_timing = true;
  bool save_checkpoints = true;
  int workers = 1;
  int eval_episodes = 0;  ///< greedy evaluation episodes after training; 0 skips

  /// Throws envs::ConfigError on any inconsistency, including missing files.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Complete JSON form with every field, paths as stored.
std::string config_to_json(const ExperimentConfig& config);

/// Training settings of one algorithm label ("dqn", "sr-dqn", ...) after the
/// guidance toggles are applied.
agent::TrainConfig train_config_for(const ExperimentConfig& config, const std::string& algorithm);

}  // namespace nesy::harness
