#include "nesy/envs/doorkey.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace nesy::envs::doorkey {

namespace {

int rand_int(std::mt19937_64& rng, int low, int high_exclusive) {
  return std::uniform_int_distribution<int>(low, high_exclusive - 1)(rng);
}

GridPos operator+(GridPos a, GridPos b) { return {a.x + b.x, a.y + b.y}; }

const std::vector<GridPos> kNeighbours{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

const char* color_name(Color c) {
  static constexpr const char* names[] = {"red", "green", "blue", "purple", "yellow", "grey"};
  return names[static_cast<int>(c)];
}

GridPos heading_vector(Heading h) {
  switch (h) {
    case Heading::East:
      return {1, 0};
    case Heading::South:
      return {0, 1};
    case Heading::West:
      return {-1, 0};
    case Heading::North:
      return {0, -1};
  }
  return {0, 0};
}

Heading turned_left(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }
Heading turned_right(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }

Cell State::at(GridPos p) const {
  if (!in_bounds(p)) return Cell{Object::Wall, Color::Grey, DoorState::Open};
  return cells[static_cast<std::size_t>(p.y * size + p.x)];
}

GridPos State::front() const { return agent + heading_vector(heading); }

GridPos view_to_world(GridPos agent, Heading h, int i, int j) {
  const GridPos f = heading_vector(h);
  const GridPos r{-f.y, f.x};
  const int ahead = kViewSize - 1 - j;
  const int side = i - kViewSize / 2;
  return {agent.x + f.x * ahead + r.x * side, agent.y + f.y * ahead + r.y * side};
}

std::array<bool, kViewSize * kViewSize> visible_cells(const State& s) {
  // MiniGrid's process_vis: light propagates from the agent row outwards and
  // stops at cells that cannot be seen through.
  constexpr int W = kViewSize;
  auto cell = [&](int i, int j) { return s.at(view_to_world(s.agent, s.heading, i, j)); };
  std::array<bool, W * W> mask{};
  auto m = [&](int i, int j) -> bool& { return mask[static_cast<std::size_t>(j * W + i)]; };
  m(W / 2, W - 1) = true;
  for (int j = W - 1; j >= 0; --j) {
    for (int i = 0; i < W - 1; ++i) {
      if (!m(i, j)) continue;
      if (!cell(i, j).see_through()) continue;
      m(i + 1, j) = true;
      if (j > 0) {
        m(i + 1, j - 1) = true;
        m(i, j - 1) = true;
      }
    }
    for (int i = W - 1; i > 0; --i) {
      if (!m(i, j)) continue;
      if (!cell(i, j).see_through()) continue;
      m(i - 1, j) = true;
      if (j > 0) {
        m(i - 1, j - 1) = true;
        m(i, j - 1) = true;
      }
    }
  }
  return mask;
}

Observation observe(const State& s) {
  Observation obs;
  obs.carrying = s.carrying;
  const auto mask = visible_cells(s);
  for (int j = 0; j < kViewSize; ++j) {
    for (int i = 0; i < kViewSize; ++i) {
      const auto idx = static_cast<std::size_t>((j * kViewSize + i) * 3);
      if (!mask[static_cast<std::size_t>(j * kViewSize + i)]) continue;  // unseen stays (0,0,0)
      Cell c = s.at(view_to_world(s.agent, s.heading, i, j));
      if (i == kViewSize / 2 && j == kViewSize - 1) c = Cell{};  // agent's own cell
      obs.image[idx] = static_cast<std::uint8_t>(c.object);
      const bool coloured = c.object != Object::Empty;
      obs.image[idx + 1] = coloured ? static_cast<std::uint8_t>(c.color) : 0;
      obs.image[idx + 2] = c.object == Object::Door ? static_cast<std::uint8_t>(c.door) : 0;
    }
  }
  return obs;
}

void encode(const Observation& obs, std::span<double> out) {
  if (out.size() != kObservationSize) throw std::invalid_argument("doorkey observation buffer has wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t cell = 0; cell < static_cast<std::size_t>(kViewSize * kViewSize); ++cell) {
    const std::size_t base = cell * kCellFeatures;
    out[base + obs.image[cell * 3]] = 1.0;
    out[base + kObjectCount + obs.image[cell * 3 + 1]] = 1.0;
    out[base + kObjectCount + kColorCount + obs.image[cell * 3 + 2]] = 1.0;
  }
  const std::size_t inv = kViewSize * kViewSize * kCellFeatures;
  out[inv + (obs.carrying ? 1 + static_cast<std::size_t>(*obs.carrying) : 0)] = 1.0;
}

bool layout_solvable(const State& s) {
  auto reachable = [&](GridPos start, std::optional<GridPos> extra_free) {
    std::vector<char> seen(static_cast<std::size_t>(s.size * s.size), 0);
    std::deque<GridPos> queue{start};
    seen[static_cast<std::size_t>(start.y * s.size + start.x)] = 1;
    while (!queue.empty()) {
      const GridPos p = queue.front();
      queue.pop_front();
      for (const auto& d : kNeighbours) {
        const GridPos q = p + d;
        if (!s.in_bounds(q)) continue;
        auto& flag = seen[static_cast<std::size_t>(q.y * s.size + q.x)];
        if (flag) continue;
        if (!(s.at(q).passable() || (extra_free && *extra_free == q))) continue;
        flag = 1;
        queue.push_back(q);
      }
    }
    return seen;
  };

  const Color door_color = s.at(s.door).color;
  std::optional<GridPos> key;
  for (int y = 0; y < s.size; ++y)
    for (int x = 0; x < s.size; ++x)
      if (s.at({x, y}).object == Object::Key && s.at({x, y}).color == door_color) key = GridPos{x, y};
  if (!key) return false;

  const auto before = reachable(s.agent, std::nullopt);
  const bool key_adjacent = std::any_of(kNeighbours.begin(), kNeighbours.end(), [&](GridPos d) {
    const GridPos q = *key + d;
    return s.in_bounds(q) && before[static_cast<std::size_t>(q.y * s.size + q.x)];
  });
  if (!key_adjacent) return false;

  const auto after = reachable(s.agent, key);
  const GridPos door_front{s.door.x - 1, s.door.y};
  if (!after[static_cast<std::size_t>(door_front.y * s.size + door_front.x)]) return false;

  // Beyond the door the area holds only the goal.
  State opened = s;
  opened.mutable_at(s.door).door = DoorState::Open;
  const auto beyond = [&] {
    std::vector<char> seen(static_cast<std::size_t>(s.size * s.size), 0);
    std::deque<GridPos> queue{s.door};
    seen[static_cast<std::size_t>(s.door.y * s.size + s.door.x)] = 1;
    while (!queue.empty()) {
      const GridPos p = queue.front();
      queue.pop_front();
      for (const auto& d : kNeighbours) {
        const GridPos q = p + d;
        if (!opened.in_bounds(q) || !opened.at(q).passable()) continue;
        auto& flag = seen[static_cast<std::size_t>(q.y * s.size + q.x)];
        if (!flag) {
          flag = 1;
          queue.push_back(q);
        }
      }
    }
    return seen;
  }();
  return beyond[static_cast<std::size_t>(s.goal.y * s.size + s.goal.x)] != 0;
}

// ---------------------------------------------------------------------------

DoorKeyEnv::DoorKeyEnv(const EnvConfig& raw) {
  const EnvConfig config = normalized(raw);
  size_ = config.grid_size;
  num_keys_ = config.num_keys;
  max_steps_ = config.max_steps;
  reset(config.seed);
}

const std::vector<std::string>& DoorKeyEnv::action_names() const {
  static const std::vector<std::string> names{"left", "right", "forward", "pickup", "open"};
  return names;
}

void DoorKeyEnv::generate(std::mt19937_64& rng) {
  const int n = size_;
  State s;
  s.size = n;
  s.max_steps = max_steps_;
  s.cells.assign(static_cast<std::size_t>(n * n), Cell{});
  for (int i = 0; i < n; ++i) {
    s.mutable_at({i, 0}) = s.mutable_at({i, n - 1}) = s.mutable_at({0, i}) = s.mutable_at({n - 1, i}) =
        Cell{Object::Wall, Color::Grey, DoorState::Open};
  }
  s.goal = {n - 2, n - 2};
  s.mutable_at(s.goal) = Cell{Object::Goal, Color::Green, DoorState::Open};

  // The split column must leave room for the agent and all keys on its left.
  int split = 0;
  do {
    split = rand_int(rng, 2, n - 2);
  } while ((split - 1) * (n - 2) < num_keys_ + 1);
  for (int y = 0; y < n; ++y) s.mutable_at({split, y}) = Cell{Object::Wall, Color::Grey, DoorState::Open};

  auto random_free_left = [&]() {
    while (true) {
      const GridPos p{rand_int(rng, 1, split), rand_int(rng, 1, n - 1)};
      if (s.at(p).object == Object::Empty && p != s.agent) return p;
    }
  };
  s.agent = {-1, -1};
  s.agent = random_free_left();
  s.heading = static_cast<Heading>(rand_int(rng, 0, 4));

  s.door = {split, rand_int(rng, 1, n - 2)};
  const auto door_color = static_cast<Color>(rand_int(rng, 0, kColorCount));
  s.mutable_at(s.door) = Cell{Object::Door, door_color, DoorState::Locked};

  std::vector<Color> palette;
  for (int c = 0; c < kColorCount; ++c)
    if (static_cast<Color>(c) != door_color) palette.push_back(static_cast<Color>(c));
  std::shuffle(palette.begin(), palette.end(), rng);
  std::vector<Color> key_colors{door_color};
  for (int k = 1; k < num_keys_; ++k) key_colors.push_back(palette[static_cast<std::size_t>(k - 1)]);
  for (const auto c : key_colors) s.mutable_at(random_free_left()) = Cell{Object::Key, c, DoorState::Open};

  state_ = std::move(s);
}

void DoorKeyEnv::reset(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x646b6579u};
  std::mt19937_64 rng(seq);
  do {
    generate(rng);
  } while (!layout_solvable(state_));
}

StepResult DoorKeyEnv::step(int action) {
  if (state_.done) throw std::logic_error("doorkey: step() called after the episode terminated");
  if (action < 0 || action >= action_count()) throw std::out_of_range("doorkey: invalid action index");

  auto& s = state_;
  ++s.step_count;
  StepResult r;
  const GridPos ahead = s.front();
  Cell fwd = s.at(ahead);
  switch (action) {
    case Left:
      s.heading = turned_left(s.heading);
      break;
    case Right:
      s.heading = turned_right(s.heading);
      break;
    case Forward:
      if (fwd.passable()) {
        s.agent = ahead;
        if (fwd.object == Object::Goal) {
          s.success = true;
          r.success = true;
          r.reward = success_reward(s.step_count, s.max_steps);
        }
      }
      break;
    case Pickup:
      if (fwd.object == Object::Key && !s.carrying) {
        s.carrying = fwd.color;
        s.mutable_at(ahead) = Cell{};
      }
      break;
    case Open:
      if (fwd.object == Object::Door && fwd.door == DoorState::Locked && s.carrying == fwd.color) {
        s.mutable_at(ahead).door = DoorState::Open;
      }
      break;
    default:
      break;
  }
  if (s.step_count >= s.max_steps && !r.success) r.truncated = true;
  r.terminal = r.success || s.step_count >= s.max_steps;
  s.done = r.terminal;
  return r;
}

void DoorKeyEnv::encode_observation(std::span<double> out) const { encode(observe(state_), out); }

std::string DoorKeyEnv::render() const {
  const auto& s = state_;
  std::ostringstream os;
  for (int y = 0; y < s.size; ++y) {
    for (int x = 0; x < s.size; ++x) {
      const GridPos p{x, y};
      if (p == s.agent) {
        static constexpr char arrows[] = {'>', 'v', '<', '^'};
        os << arrows[static_cast<int>(s.heading)];
        continue;
      }
      const Cell c = s.at(p);
      switch (c.object) {
        case Object::Wall:
          os << '#';
          break;
        case Object::Goal:
          os << 'G';
          break;
        case Object::Key:
          os << "rgbpyx"[static_cast<int>(c.color)];
          break;
        case Object::Door:
          os << (c.door == DoorState::Open ? '/' : 'D');
          break;
        default:
          os << '.';
          break;
      }
    }
    os << '\n';
  }
  os << "step " << s.step_count << "/" << s.max_steps << "  door " << color_name(s.at(s.door).color)
     << "  carrying " << (s.carrying ? color_name(*s.carrying) : "nothing") << '\n';
  return os.str();
}

}  // namespace nesy::envs::doorkey
