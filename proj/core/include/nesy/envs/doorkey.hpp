#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nesy/envs/environment.hpp"

namespace nesy::envs::doorkey {

// Encoding tables follow the MiniGrid conventions.
enum class Object : std::uint8_t { Unseen = 0, Empty, Wall, Floor, Door, Key, Ball, Box, Goal, Lava, Agent };
enum class Color : std::uint8_t { Red = 0, Green, Blue, Purple, Yellow, Grey };
enum class DoorState : std::uint8_t { Open = 0, Closed, Locked };
/// East, South, West, North; y grows downwards.
enum class Heading : std::uint8_t { East = 0, South, West, North };

enum Action : int { Left = 0, Right, Forward, Pickup, Open };

inline constexpr int kObjectCount = 11;
inline constexpr int kColorCount = 6;
inline constexpr int kStateCount = 3;
inline constexpr int kViewSize = 7;
inline constexpr int kCellFeatures = kObjectCount + kColorCount + kStateCount;
inline constexpr std::size_t kObservationSize = kViewSize * kViewSize * kCellFeatures + 1 + kColorCount;

const char* color_name(Color c);
GridPos heading_vector(Heading h);
Heading turned_left(Heading h);
Heading turned_right(Heading h);

struct Cell {
  Object object = Object::Empty;
  Color color = Color::Red;
  DoorState door = DoorState::Open;

  bool passable() const {
    return object == Object::Empty || object == Object::Goal || object == Object::Floor ||
           (object == Object::Door && door == DoorState::Open);
  }
  bool see_through() const {
    return !(object == Object::Wall || (object == Object::Door && door != DoorState::Open));
  }
  auto operator<=>(const Cell&) const = default;
};

/// Full (god's-eye) episode state.
struct State {
  int size = 0;
  int max_steps = 0;
  int step_count = 0;
  GridPos agent;
  Heading heading = Heading::East;
  std::vector<Cell> cells;  ///< row-major, index y * size + x
  std::optional<Color> carrying;
  GridPos door;
  GridPos goal;
  bool done = false;
  bool success = false;

  bool in_bounds(GridPos p) const { return p.x >= 0 && p.y >= 0 && p.x < size && p.y < size; }
  /// Out-of-bounds reads return a wall.
  Cell at(GridPos p) const;
  Cell& mutable_at(GridPos p) { return cells[static_cast<std::size_t>(p.y * size + p.x)]; }
  GridPos front() const;

  auto operator<=>(const State&) const = default;
};

/// Egocentric 7x7 view. Cell (i, j): i = 0..6 left to right, j = 0..6 far to
/// near; the agent sits at (3, 6) facing j = 0.
struct Observation {
  std::array<std::uint8_t, kViewSize * kViewSize * 3> image{};
  std::optional<Color> carrying;

  std::uint8_t object(int i, int j) const { return image[static_cast<std::size_t>((j * kViewSize + i) * 3)]; }
  bool operator==(const Observation&) const = default;
};

/// World coordinates of view cell (i, j) for an agent at `agent` facing `h`.
GridPos view_to_world(GridPos agent, Heading h, int i, int j);

/// Visibility mask over the view (occlusion by walls and closed doors).
std::array<bool, kViewSize * kViewSize> visible_cells(const State& s);

Observation observe(const State& s);

/// Structural solvability used by the layout generator: the matching key can
/// be faced, and after picking it the cell in front of the door is reachable.
bool layout_solvable(const State& s);

class DoorKeyEnv final : public Environment {
 public:
  explicit DoorKeyEnv(const EnvConfig& config);

  std::string domain_id() const override { return "doorkey"; }
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
  std::unique_ptr<Environment> clone() const override { return std::make_unique<DoorKeyEnv>(*this); }

  const State& state() const { return state_; }
  int num_keys() const { return num_keys_; }

 private:
  void generate(std::mt19937_64& rng);

  int size_;
  int num_keys_;
  int max_steps_;
  State state_;
};

/// Writes the one-hot encoding of an observation; `out` must hold kObservationSize values.
void encode(const Observation& obs, std::span<double> out);

}  // namespace nesy::envs::doorkey
