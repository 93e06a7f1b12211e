#include <doctest.h>

#include <map>
#include <vector>

#include "nesy/envs/doorkey.hpp"
#include "nesy/envs/office_world.hpp"
#include "oracles.hpp"

using namespace nesy::envs;

namespace {

doorkey::DoorKeyEnv make_doorkey(int n, int keys, std::uint64_t seed) {
  EnvConfig c;
  c.domain = "doorkey";
  c.grid_size = n;
  c.num_keys = keys;
  doorkey::DoorKeyEnv env(normalized(c));
  env.reset(seed);
  return env;
}

office::OfficeWorldEnv make_office(const std::string& task) {
  EnvConfig c;
  c.domain = "officeworld";
  c.task = task;
  office::OfficeWorldEnv env(normalized(c));
  env.reset(0);
  return env;
}

}  // namespace

TEST_SUITE("envs") {

TEST_CASE("config normalization") {
  EnvConfig c;
  c.grid_size = 8;
  CHECK(normalized(c).max_steps == 640);
  c.domain = "officeworld";
  c.task = "deliver_coffee";
  CHECK(normalized(c).max_steps == 1000);
  c.task = "fetch";
  CHECK_THROWS_AS(normalized(c), ConfigError);
  EnvConfig d;
  d.grid_size = 4;
  CHECK_THROWS_AS(normalized(d), ConfigError);
  d.grid_size = 5;
  d.num_keys = 7;
  CHECK_THROWS_AS(normalized(d), ConfigError);
}

TEST_CASE("doorkey layouts are seeded and well formed") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = make_doorkey(8, 2, seed);
    const auto b = make_doorkey(8, 2, seed);
    CHECK(a.state() == b.state());
    const auto& s = a.state();
    int keys = 0;
    for (const auto& cell : s.cells) keys += cell.object == doorkey::Object::Key;
    CHECK(keys == 2);
    CHECK(s.at(s.door).object == doorkey::Object::Door);
    CHECK(s.at(s.door).door == doorkey::DoorState::Locked);
    CHECK(s.at(s.goal).object == doorkey::Object::Goal);
    CHECK(s.at(s.agent).object == doorkey::Object::Empty);
  }
  CHECK(make_doorkey(8, 2, 1).state() != make_doorkey(8, 2, 2).state());
}

TEST_CASE("doorkey layouts are solvable per BFS") {
  for (int keys : {1, 2, 4}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto env = make_doorkey(8, keys, seed);
      double reward = 0.0;
      const int t = oracle::bfs_shortest_solution(env, &reward);
      REQUIRE(t > 0);
      CHECK(reward == 1.0 - 0.9 * (static_cast<double>(t) / 640.0));
    }
  }
}

TEST_CASE("doorkey shortest solution length") {
  auto env = make_doorkey(5, 1, 3);
  const int t = oracle::bfs_shortest_solution(env);
  REQUIRE(t > 0);
  CHECK(t >= 5);  // at least pickup, open and three moves
  CHECK(env.observation_size() == 7 * 7 * 20 + 7);
  CHECK(doorkey::kObservationSize == 987);
}

TEST_CASE("doorkey actions") {
  auto env = make_doorkey(5, 1, 0);
  const auto h = env.state().heading;
  env.step(doorkey::Left);
  CHECK(env.state().heading == doorkey::turned_left(h));
  env.step(doorkey::Right);
  CHECK(env.state().heading == h);
  // Open without a key leaves the door locked.
  auto s = env.state();
  for (int i = 0; i < 4 && env.state().front() != s.door; ++i) env.step(doorkey::Left);
  env.step(doorkey::Open);
  CHECK(env.state().at(s.door).door == doorkey::DoorState::Locked);
  CHECK(env.step_count() > 0);
  CHECK_THROWS_AS(env.step(9), std::out_of_range);
}

TEST_CASE("doorkey time limit truncates with zero reward") {
  auto env = make_doorkey(5, 1, 0);
  StepResult r;
  for (int i = 0; i < env.max_steps(); ++i) r = env.step(doorkey::Left);
  CHECK(r.terminal);
  CHECK(r.truncated);
  CHECK_FALSE(r.success);
  CHECK(r.reward == 0.0);
  CHECK_THROWS_AS(env.step(doorkey::Left), std::logic_error);
}

TEST_CASE("doorkey view geometry") {
  const GridPos agent{3, 3};
  CHECK(doorkey::view_to_world(agent, doorkey::Heading::North, 3, 6) == agent);
  CHECK(doorkey::view_to_world(agent, doorkey::Heading::North, 3, 5) == GridPos{3, 2});
  CHECK(doorkey::view_to_world(agent, doorkey::Heading::East, 3, 5) == GridPos{4, 3});
  CHECK(doorkey::view_to_world(agent, doorkey::Heading::East, 2, 6) == GridPos{3, 2});
  CHECK(doorkey::view_to_world(agent, doorkey::Heading::South, 4, 6) == GridPos{2, 3});
}

TEST_CASE("doorkey observation is one-hot per cell") {
  const auto env = make_doorkey(8, 2, 5);
  std::vector<double> x(env.observation_size());
  env.encode_observation(x);
  for (int cell = 0; cell < doorkey::kViewSize * doorkey::kViewSize; ++cell) {
    double obj = 0, col = 0, st = 0;
    for (int k = 0; k < doorkey::kObjectCount; ++k) obj += x[static_cast<std::size_t>(cell * doorkey::kCellFeatures + k)];
    for (int k = 0; k < doorkey::kColorCount; ++k)
      col += x[static_cast<std::size_t>(cell * doorkey::kCellFeatures + doorkey::kObjectCount + k)];
    for (int k = 0; k < doorkey::kStateCount; ++k)
      st += x[static_cast<std::size_t>(cell * doorkey::kCellFeatures + doorkey::kObjectCount + doorkey::kColorCount + k)];
    CHECK(obj == 1.0);
    CHECK(col == 1.0);
    CHECK(st == 1.0);
  }
  for (double v : x) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("officeworld deliver coffee by hand") {
  auto env = make_office("deliver_coffee");
  CHECK(env.observation_size() == 122);
  const auto coffee = office::layout::cells_with('f').front();
  const auto officep = office::layout::cells_with('g').front();
  StepResult r;
  int steps = 0;
  for (int a : oracle::office_path(env.state().agent, coffee)) {
    r = env.step(a);
    ++steps;
  }
  CHECK(env.state().has_coffee);
  CHECK_FALSE(r.terminal);
  for (int a : oracle::office_path(coffee, officep)) {
    r = env.step(a);
    ++steps;
  }
  CHECK(r.success);
  CHECK(r.terminal);
  CHECK(r.reward == 1.0 - 0.9 * (steps / 1000.0));
}

TEST_CASE("officeworld decoration ends the episode without reward") {
  const auto deco = office::layout::cells_with('n').front();
  auto env = make_office("deliver_coffee");
  const auto path = oracle::office_path(env.state().agent, deco);
  REQUIRE_FALSE(path.empty());
  StepResult r;
  for (int a : path) r = env.step(a);
  CHECK(r.terminal);
  CHECK_FALSE(r.success);
  CHECK_FALSE(r.truncated);
  CHECK(r.reward == 0.0);
}

TEST_CASE("officeworld walls block moves") {
  int blocked = 0;
  for (int x = 0; x < office::kWidth; ++x)
    for (int y = 0; y < office::kHeight; ++y)
      for (int a = 0; a < 4; ++a) {
        const GridPos p{x, y};
        if (office::layout::wall_blocks(p, a)) {
          ++blocked;
        } else {
          CHECK(office::layout::in_bounds(office::layout::moved(p, a)));
        }
      }
  CHECK(blocked > 0);
}

}  // TEST_SUITE
