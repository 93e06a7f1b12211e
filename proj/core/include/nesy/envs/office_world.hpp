#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nesy/envs/environment.hpp"

namespace nesy::envs::office {

enum class Task { DeliverCoffee, DeliverCoffeeAndMail, PatrolAB, PatrolABC };
/// left = x-1, right = x+1, up = y+1, down = y-1.
enum Action : int { Left = 0, Right, Up, Down };

inline constexpr int kWidth = 12;
inline constexpr int kHeight = 9;
inline constexpr std::size_t kFlagCount = 14;
inline constexpr std::size_t kObservationSize = kWidth * kHeight + kFlagCount;

Task parse_task(const std::string& name);
std::string task_name(Task task);

/// Static 12x9 office map with thin walls between rooms.
namespace layout {
/// Cell marker: 'a'..'d' rooms, 'e' mail, 'f' coffee, 'g' office, 'n' decoration, '\0' none.
char marker(GridPos p);
bool in_bounds(GridPos p);
/// True if a wall blocks moving from `p` with `action`.
bool wall_blocks(GridPos p, int action);
GridPos moved(GridPos p, int action);
GridPos start();
std::vector<GridPos> cells_with(char marker);
}  // namespace layout

struct State {
  GridPos agent;
  bool has_coffee = false;
  bool has_mail = false;
  std::vector<char> visited;  ///< rooms entered, first-visit order
  int patrol_progress = 0;    ///< rooms completed in the required order
  int step_count = 0;
  int max_steps = 0;
  bool done = false;
  bool success = false;
  bool failed = false;

  auto operator<=>(const State&) const = default;
};

/// Whether `s` satisfies `task` (the agent stands where the task completes).
bool task_satisfied(Task task, const State& s);

class OfficeWorldEnv final : public Environment {
 public:
  explicit OfficeWorldEnv(const EnvConfig& config);

  std::string domain_id() const override { return "officeworld"; }
  const std::vector<std::string>& action_names() const override;
  void reset(std::uint64_t seed) override;
  StepResult step(int action) override;
  bool terminal() const override { return state_.done; }
  bool task_success() const override { return state_.success; }
  int step_count() const override { return state_.step_count; }
  int max_steps() const override { return state_.max_steps; }
  std::size_t observation_size() const override { return kObservationSize; }
  void encode_observation(std::span<double> out) const override;
  std::string render() const override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<OfficeWorldEnv>(*this); }

  const State& state() const { return state_; }
  Task task() const { return task_; }

 private:
  Task task_;
  int max_steps_;
  State state_;
};

}  // namespace nesy::envs::office
