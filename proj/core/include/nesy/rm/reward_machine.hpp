#pragma once

#include <filesystem>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nesy/agent/train.hpp"
#include "nesy/envs/doorkey.hpp"
#include "nesy/envs/office_world.hpp"

namespace nesy::rm {

using EventSet = std::set<std::string>;

/// Every proposition the built-in detectors can raise.
const EventSet& known_events();

class UnknownEventError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Edge {
  std::string from;
  EventSet events;  ///< fires when all of these occur in one step
  std::string to;
  double reward = 0.0;
};

/// Finite automaton over event sets with rewards on state changes. Edges are
/// tried in declaration order; no matching edge means a zero-reward self-loop.
/// Accepting states absorb.
class RewardMachine {
 public:
  RewardMachine(std::vector<std::string> states, std::string initial, std::set<std::string> accepting,
                std::vector<Edge> edges, EventSet events = known_events());

  int initial() const { return initial_; }
  std::size_t state_count() const { return states_.size(); }
  const std::vector<std::string>& states() const { return states_; }
  const std::string& state_name(int u) const { return states_.at(static_cast<std::size_t>(u)); }
  int state_index(const std::string& name) const;
  bool accepting(int u) const;
  const EventSet& events() const { return events_; }
  std::vector<Edge> edges() const;

  /// (u', reward). Throws UnknownEventError for an undeclared event.
  std::pair<int, double> step(int u, const EventSet& events) const;

 private:
  struct Compiled {
    int from;
    EventSet events;
    int to;
    double reward;
  };
  std::vector<std::string> states_;
  int initial_ = 0;
  std::vector<bool> accepting_;
  EventSet events_;
  std::vector<Compiled> edges_;
};

RewardMachine machine_from_json_text(const std::string& text);
RewardMachine load_machine(const std::filesystem::path& path);
std::string machine_to_json_text(const RewardMachine& machine);

/// Task machines with `bonus` on every state change: DoorKey key -> door ->
/// goal; DeliverCoffee coffee -> office; DeliverCoffeeAndMail coffee and mail
/// in either order -> office; PatrolAB / PatrolABC rooms in order.
RewardMachine builtin_machine(const envs::EnvConfig& env, double bonus = 0.1);

/// picked_key (the key matching the door), opened_door, at_goal.
EventSet detect_events(const envs::doorkey::State& before, int action, const envs::doorkey::State& after);
/// got_coffee, got_mail, at_office, at_A..at_D, broke_decoration.
EventSet detect_events(const envs::office::State& before, int action, const envs::office::State& after);

/// Observation/reward product of an environment with a machine: appends the
/// one-hot machine state and returns the transition reward as shaping.
class MachineAugmenter final : public agent::Augmenter {
 public:
  explicit MachineAugmenter(RewardMachine machine) : machine_(std::move(machine)), u_(machine_.initial()) {}

  std::size_t extra_features() const override { return machine_.state_count(); }
  void reset(const envs::Environment& env) override;
  void before_step(const envs::Environment& env) override;
  double after_step(const envs::Environment& env, int action, const envs::StepResult& result) override;
  void append_features(neural::Features& features, std::uint32_t base) const override;
  std::unique_ptr<agent::Augmenter> clone() const override { return std::make_unique<MachineAugmenter>(*this); }

  int state() const { return u_; }
  const RewardMachine& machine() const { return machine_; }

 private:
  RewardMachine machine_;
  int u_;
  std::variant<std::monostate, envs::doorkey::State, envs::office::State> before_;
};

/// DQN on the product: observations carry the machine state, the optimised
/// reward is env + shaping, recorded returns hold the env reward alone.
agent::RunMetrics rm_train(const agent::TrainConfig& config, const RewardMachine& machine, std::uint64_t seed,
                           const agent::EpisodeCallback& on_episode = {});

}  // namespace nesy::rm
