#include "nesy/envs/office_world.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>
#include <tuple>

namespace nesy::envs::office {

Task parse_task(const std::string& name) {
  if (name == "deliver_coffee") return Task::DeliverCoffee;
  if (name == "deliver_coffee_and_mail") return Task::DeliverCoffeeAndMail;
  if (name == "patrol_ab") return Task::PatrolAB;
  if (name == "patrol_abc") return Task::PatrolABC;
  throw ConfigError("unknown officeworld task '" + name + "'");
}

std::string task_name(Task task) {
  switch (task) {
    case Task::DeliverCoffee:
      return "deliver_coffee";
    case Task::DeliverCoffeeAndMail:
      return "deliver_coffee_and_mail";
    case Task::PatrolAB:
      return "patrol_ab";
    case Task::PatrolABC:
      return "patrol_abc";
  }
  return "?";
}

namespace layout {

namespace {

struct Map {
  std::array<char, kWidth * kHeight> markers{};
  std::set<std::tuple<int, int, int>> forbidden;

  Map() {
    auto put = [&](int x, int y, char c) { markers[static_cast<std::size_t>(y * kWidth + x)] = c; };
    put(1, 1, 'a');
    put(1, 7, 'b');
    put(10, 7, 'c');
    put(10, 1, 'd');
    put(7, 4, 'e');
    put(8, 2, 'f');
    put(3, 6, 'f');
    put(4, 4, 'g');
    for (auto [x, y] : {std::pair{4, 1}, {7, 1}, {4, 7}, {7, 7}, {1, 4}, {10, 4}}) put(x, y, 'n');

    // Every 3x3 room is enclosed, then doorways are opened.
    for (int x = 0; x < kWidth; ++x) {
      for (int y : {0, 3, 6}) {
        forbidden.emplace(x, y, Down);
        forbidden.emplace(x, y + 2, Up);
      }
    }
    for (int y = 0; y < kHeight; ++y) {
      for (int x : {0, 3, 6, 9}) {
        forbidden.emplace(x, y, Left);
        forbidden.emplace(x + 2, y, Right);
      }
    }
    for (int y : {1, 7}) {
      for (int x : {2, 5, 8}) {
        forbidden.erase({x, y, Right});
        forbidden.erase({x + 1, y, Left});
      }
    }
    for (int x : {1, 4, 7, 10}) {
      forbidden.erase({x, 5, Up});
      forbidden.erase({x, 6, Down});
    }
    for (int x : {1, 10}) {
      forbidden.erase({x, 2, Up});
      forbidden.erase({x, 3, Down});
    }
  }
};

const Map& map() {
  static const Map m;
  return m;
}

}  // namespace

bool in_bounds(GridPos p) { return p.x >= 0 && p.y >= 0 && p.x < kWidth && p.y < kHeight; }

char marker(GridPos p) {
  if (!in_bounds(p)) return '\0';
  return map().markers[static_cast<std::size_t>(p.y * kWidth + p.x)];
}

bool wall_blocks(GridPos p, int action) {
  if (map().forbidden.contains({p.x, p.y, action})) return true;
  return !in_bounds(moved(p, action));
}

GridPos moved(GridPos p, int action) {
  switch (action) {
    case Left:
      return {p.x - 1, p.y};
    case Right:
      return {p.x + 1, p.y};
    case Up:
      return {p.x, p.y + 1};
    case Down:
      return {p.x, p.y - 1};
    default:
      return p;
  }
}

GridPos start() { return {2, 1}; }

std::vector<GridPos> cells_with(char c) {
  std::vector<GridPos> out;
  for (int y = 0; y < kHeight; ++y)
    for (int x = 0; x < kWidth; ++x)
      if (marker({x, y}) == c) out.push_back({x, y});
  return out;
}

}  // namespace layout

bool task_satisfied(Task task, const State& s) {
  const bool at_office = layout::marker(s.agent) == 'g';
  switch (task) {
    case Task::DeliverCoffee:
      return at_office && s.has_coffee;
    case Task::DeliverCoffeeAndMail:
      return at_office && s.has_coffee && s.has_mail;
    case Task::PatrolAB:
      return s.patrol_progress >= 2;
    case Task::PatrolABC:
      return s.patrol_progress >= 3;
  }
  return false;
}

OfficeWorldEnv::OfficeWorldEnv(const EnvConfig& raw) {
  const EnvConfig config = normalized(raw);
  task_ = parse_task(config.task);
  max_steps_ = config.max_steps;
  reset(config.seed);
}

const std::vector<std::string>& OfficeWorldEnv::action_names() const {
  static const std::vector<std::string> names{"left", "right", "up", "down"};
  return names;
}

void OfficeWorldEnv::reset(std::uint64_t /*seed*/) {
  state_ = State{};
  state_.agent = layout::start();
  state_.max_steps = max_steps_;
}

StepResult OfficeWorldEnv::step(int action) {
  if (state_.done) throw std::logic_error("officeworld: step() called after the episode terminated");
  if (action < 0 || action >= action_count()) throw std::out_of_range("officeworld: invalid action index");

  auto& s = state_;
  ++s.step_count;
  StepResult r;
  if (!layout::wall_blocks(s.agent, action)) s.agent = layout::moved(s.agent, action);

  const char m = layout::marker(s.agent);
  if (m == 'n') {
    s.failed = true;
  } else if (m == 'f') {
    s.has_coffee = true;
  } else if (m == 'e') {
    s.has_mail = true;
  } else if (m >= 'a' && m <= 'd') {
    if (std::find(s.visited.begin(), s.visited.end(), m) == s.visited.end()) s.visited.push_back(m);
    static constexpr char order[] = {'a', 'b', 'c'};
    if (s.patrol_progress < 3 && m == order[s.patrol_progress]) ++s.patrol_progress;
  }

  if (!s.failed && task_satisfied(task_, s)) {
    s.success = true;
    r.success = true;
    r.reward = success_reward(s.step_count, s.max_steps);
  }
  if (s.step_count >= s.max_steps && !r.success && !s.failed) r.truncated = true;
  r.terminal = s.failed || r.success || s.step_count >= s.max_steps;
  s.done = r.terminal;
  return r;
}

void OfficeWorldEnv::encode_observation(std::span<double> out) const {
  if (out.size() != kObservationSize) throw std::invalid_argument("officeworld observation buffer has wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  const auto& s = state_;
  out[static_cast<std::size_t>(s.agent.y * kWidth + s.agent.x)] = 1.0;
  std::size_t f = kWidth * kHeight;
  out[f++] = s.has_coffee ? 1.0 : 0.0;
  out[f++] = s.has_mail ? 1.0 : 0.0;
  for (char room : {'a', 'b', 'c', 'd'}) {
    out[f++] = std::find(s.visited.begin(), s.visited.end(), room) != s.visited.end() ? 1.0 : 0.0;
  }
  out[f + static_cast<std::size_t>(std::min(s.patrol_progress, 3))] = 1.0;
  f += 4;
  for (int a = Left; a <= Down; ++a) {
    const bool deco = !layout::wall_blocks(s.agent, a) && layout::marker(layout::moved(s.agent, a)) == 'n';
    out[f++] = deco ? 1.0 : 0.0;
  }
}

std::string OfficeWorldEnv::render() const {
  std::ostringstream os;
  for (int y = kHeight - 1; y >= 0; --y) {
    for (int x = 0; x < kWidth; ++x) {
      const GridPos p{x, y};
      if (p == state_.agent) {
        os << '@';
        continue;
      }
      const char m = layout::marker(p);
      os << (m == '\0' ? '.' : m == 'n' ? '*' : m == 'g' ? 'o' : m);
      if (x % 3 == 2 && x + 1 < kWidth) os << (layout::wall_blocks(p, Right) ? '|' : ' ');
    }
    os << '\n';
    if (y % 3 == 0 && y > 0) os << "---+---+---+---\n";
  }
  os << "step " << state_.step_count << "/" << state_.max_steps << "  coffee " << state_.has_coffee << "  mail "
     << state_.has_mail << "  patrol " << state_.patrol_progress << '\n';
  return os.str();
}

}  // namespace nesy::envs::office
