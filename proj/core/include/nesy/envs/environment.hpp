#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nesy::envs {

struct GridPos {
  int x = 0;
  int y = 0;
  auto operator<=>(const GridPos&) const = default;
};

/// Experiment-file environment block.
struct EnvConfig {
  std::string domain = "doorkey";  ///< "doorkey" | "officeworld"
  std::string task = "doorkey";    ///< officeworld: deliver_coffee, deliver_coffee_and_mail, patrol_ab, patrol_abc
  int grid_size = 5;
  int num_keys = 1;
  int max_steps = 0;  ///< 0 selects the domain default (10 * N^2 for DoorKey, 1000 for OfficeWorld)
  std::uint64_t seed = 0;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reward for completing the task at `step_count` out of `max_steps`.
inline double success_reward(int step_count, int max_steps) {
  return 1.0 - 0.9 * (static_cast<double>(step_count) / static_cast<double>(max_steps));
}

struct StepResult {
  double reward = 0.0;
  bool terminal = false;   ///< success, failure, or time limit
  bool success = false;
  bool truncated = false;  ///< ended only because step_count reached max_steps
};

/// A deterministic gridworld episode. Implementations are single-threaded value
/// types; copy an environment to branch a trajectory.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string domain_id() const = 0;
  virtual const std::vector<std::string>& action_names() const = 0;
  int action_count() const { return static_cast<int>(action_names().size()); }

  /// Starts a new episode. DoorKey draws a fresh layout from `seed`;
  /// OfficeWorld ignores it.
  virtual void reset(std::uint64_t seed) = 0;
  /// Throws std::logic_error when called after a terminal step.
  virtual StepResult step(int action) = 0;

  virtual bool terminal() const = 0;
  virtual bool task_success() const = 0;
  virtual int step_count() const = 0;
  virtual int max_steps() const = 0;

  /// Length of the binary feature vector fed to the Q-network.
  virtual std::size_t observation_size() const = 0;
  /// Writes the current observation as a 0/1 feature vector.
  virtual void encode_observation(std::span<double> out) const = 0;

  virtual std::string render() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  int action_index(const std::string& name) const;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& config);

/// Applies domain defaults (max_steps) and validates the block. Throws ConfigError.
EnvConfig normalized(EnvConfig config);

}  // namespace nesy::envs
