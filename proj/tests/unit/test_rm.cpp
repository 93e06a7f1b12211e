#include <doctest.h>

#include "nesy/rm/reward_machine.hpp"
#include "oracles.hpp"

using namespace nesy;
using namespace nesy::rm;

namespace {

envs::EnvConfig office(const std::string& task) {
  envs::EnvConfig c;
  c.domain = "officeworld";
  c.task = task;
  return c;
}

}  // namespace

TEST_SUITE("rm") {

TEST_CASE("scripted event sequences") {
  const auto m = builtin_machine(office("deliver_coffee_and_mail"), 0.1);
  int u = m.initial();
  double total = 0.0;
  for (const EventSet& ev : std::vector<EventSet>{{}, {"got_mail"}, {"at_A"}, {"got_coffee"}, {"at_office"}}) {
    const auto [next, r] = m.step(u, ev);
    u = next;
    total += r;
  }
  CHECK(m.accepting(u));
  CHECK(total == doctest::Approx(0.3));
  // Accepting states absorb without reward.
  CHECK(m.step(u, {"got_coffee"}) == std::pair<int, double>{u, 0.0});
}

TEST_CASE("simultaneous events take the conjunction edge") {
  const auto m = builtin_machine(office("deliver_coffee_and_mail"));
  const auto [u, r] = m.step(m.initial(), {"got_coffee", "got_mail"});
  CHECK(m.state_name(u) == "both");
  CHECK(r == doctest::Approx(0.1));
}

TEST_CASE("doorkey and patrol machines") {
  envs::EnvConfig dk;
  const auto m = builtin_machine(dk, 0.2);
  int u = m.initial();
  u = m.step(u, {"opened_door"}).first;  // out of order: ignored
  CHECK(u == m.initial());
  for (const char* e : {"picked_key", "opened_door", "at_goal"}) u = m.step(u, {e}).first;
  CHECK(m.accepting(u));

  const auto p = builtin_machine(office("patrol_abc"));
  int v = p.initial();
  for (const char* e : {"at_B", "at_A", "at_C", "at_B", "at_C"}) v = p.step(v, {e}).first;
  CHECK(p.accepting(v));
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(builtin_machine(office("deliver_coffee")).step(0, {"teleported"}), UnknownEventError);
  CHECK_THROWS(RewardMachine({"s", "s"}, "s", {}, {}));
  CHECK_THROWS(RewardMachine({"s"}, "t", {}, {}));
  CHECK_THROWS(RewardMachine({"s", "t"}, "s", {}, {{"s", {"nonsense"}, "t", 1.0}}));
  CHECK_THROWS(RewardMachine({"s", "t"}, "s", {}, {{"s", {}, "t", 1.0}}));
  CHECK_THROWS(RewardMachine({"s"}, "s", {}, {{"s", {"at_A"}, "s", 1.0}}));
}

TEST_CASE("json round trip") {
  const auto m = builtin_machine(office("deliver_coffee_and_mail"));
  const auto back = machine_from_json_text(machine_to_json_text(m));
  CHECK(back.states() == m.states());
  CHECK(back.initial() == m.initial());
  REQUIRE(back.edges().size() == m.edges().size());
  for (std::size_t i = 0; i < m.edges().size(); ++i) {
    CHECK(back.edges()[i].events == m.edges()[i].events);
    CHECK(back.edges()[i].reward == m.edges()[i].reward);
  }
  CHECK_THROWS(machine_from_json_text(R"({"states": ["s"]})"));
}

TEST_CASE("augmenter follows the environment") {
  auto env = envs::make_environment(office("deliver_coffee"));
  env->reset(0);
  MachineAugmenter aug(builtin_machine(office("deliver_coffee")));
  aug.reset(*env);
  CHECK(aug.extra_features() == aug.machine().state_count());
  neural::Features f;
  aug.append_features(f, 100);
  CHECK(f == neural::Features{100 + static_cast<std::uint32_t>(aug.machine().initial())});
  const auto& state = dynamic_cast<const envs::office::OfficeWorldEnv&>(*env).state();
  double bonus = 0.0;
  for (int a : oracle::office_path(state.agent, envs::office::layout::cells_with('f').front())) {
    aug.before_step(*env);
    const auto r = env->step(a);
    bonus += aug.after_step(*env, a, r);
  }
  CHECK(state.has_coffee);
  CHECK(bonus == doctest::Approx(0.1));
  CHECK(aug.machine().state_name(aug.state()) != aug.machine().state_name(aug.machine().initial()));
}

TEST_CASE("doorkey events only for the matching key") {
  envs::doorkey::State before;
  before.size = 5;
  before.cells.assign(25, {});
  before.door = {2, 2};
  before.mutable_at(before.door) = {envs::doorkey::Object::Door, envs::doorkey::Color::Red, envs::doorkey::DoorState::Locked};
  auto after = before;
  after.carrying = envs::doorkey::Color::Blue;
  CHECK(detect_events(before, envs::doorkey::Pickup, after).empty());
  after.carrying = envs::doorkey::Color::Red;
  CHECK(detect_events(before, envs::doorkey::Pickup, after) == EventSet{"picked_key"});
  auto opened = after;
  opened.mutable_at(opened.door).door = envs::doorkey::DoorState::Open;
  CHECK(detect_events(after, envs::doorkey::Open, opened) == EventSet{"opened_door"});
}

}  // TEST_SUITE
