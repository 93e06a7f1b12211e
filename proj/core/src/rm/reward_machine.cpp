#include "nesy/rm/reward_machine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nesy::rm {

namespace dk = envs::doorkey;
namespace ow = envs::office;

const EventSet& known_events() {
  static const EventSet events{"got_coffee", "got_mail", "at_office",   "at_A",       "at_B",   "at_C",
                               "at_D",       "broke_decoration", "picked_key", "opened_door", "at_goal"};
  return events;
}

RewardMachine::RewardMachine(std::vector<std::string> states, std::string initial, std::set<std::string> accepting,
                             std::vector<Edge> edges, EventSet events)
    : states_(std::move(states)), events_(std::move(events)) {
  if (states_.empty()) throw std::invalid_argument("reward machine has no states");
  {
    auto sorted = states_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("reward machine has duplicate state names");
    }
  }
  initial_ = state_index(initial);
  accepting_.assign(states_.size(), false);
  for (const auto& a : accepting) accepting_[static_cast<std::size_t>(state_index(a))] = true;
  for (auto& e : edges) {
    for (const auto& ev : e.events)
      if (!events_.contains(ev)) throw UnknownEventError("transition uses undeclared event '" + ev + "'");
    if (e.events.empty()) throw std::invalid_argument("transition " + e.from + " -> " + e.to + " has no events");
    const int from = state_index(e.from), to = state_index(e.to);
    if (from == to && e.reward != 0.0) throw std::invalid_argument("self-loops carry no reward (" + e.from + ")");
    edges_.push_back({from, std::move(e.events), to, e.reward});
  }
}

int RewardMachine::state_index(const std::string& name) const {
  auto it = std::find(states_.begin(), states_.end(), name);
  if (it == states_.end()) throw std::invalid_argument("unknown reward machine state '" + name + "'");
  return static_cast<int>(it - states_.begin());
}

bool RewardMachine::accepting(int u) const { return accepting_.at(static_cast<std::size_t>(u)); }

std::pair<int, double> RewardMachine::step(int u, const EventSet& events) const {
  for (const auto& ev : events)
    if (!events_.contains(ev)) throw UnknownEventError("unknown event '" + ev + "'");
  if (u < 0 || static_cast<std::size_t>(u) >= states_.size()) throw std::out_of_range("reward machine state out of range");
  if (accepting_[static_cast<std::size_t>(u)]) return {u, 0.0};
  for (const auto& e : edges_) {
    if (e.from != u) continue;
    if (std::includes(events.begin(), events.end(), e.events.begin(), e.events.end())) return {e.to, e.reward};
  }
  return {u, 0.0};
}

std::vector<Edge> RewardMachine::edges() const {
  std::vector<Edge> out;
  for (const auto& e : edges_) out.push_back({state_name(e.from), e.events, state_name(e.to), e.reward});
  return out;
}

std::string machine_to_json_text(const RewardMachine& m) {
  nlohmann::json doc;
  doc["states"] = m.states();
  doc["initial"] = m.state_name(m.initial());
  std::vector<std::string> accepting;
  for (std::size_t u = 0; u < m.state_count(); ++u)
    if (m.accepting(static_cast<int>(u))) accepting.push_back(m.states()[u]);
  doc["accepting"] = accepting;
  doc["events"] = m.events();
  doc["transitions"] = nlohmann::json::array();
  for (const auto& e : m.edges()) {
    doc["transitions"].push_back({{"from", e.from}, {"events", e.events}, {"to", e.to}, {"reward", e.reward}});
  }
  return doc.dump(2);
}

RewardMachine machine_from_json_text(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  auto states = doc.at("states").get<std::vector<std::string>>();
  auto initial = doc.at("initial").get<std::string>();
  auto accepting = doc.value("accepting", std::set<std::string>{});
  EventSet events = doc.contains("events") ? doc.at("events").get<EventSet>() : known_events();
  std::vector<Edge> edges;
  for (const auto& t : doc.at("transitions")) {
    edges.push_back({t.at("from").get<std::string>(), t.at("events").get<EventSet>(), t.at("to").get<std::string>(),
                     t.value("reward", 0.0)});
  }
  return RewardMachine(std::move(states), std::move(initial), std::move(accepting), std::move(edges), std::move(events));
}

RewardMachine load_machine(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reward machine " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return machine_from_json_text(buf.str());
}

namespace {

RewardMachine sequence(const std::vector<std::string>& steps, double bonus) {
  std::vector<std::string> states;
  std::vector<Edge> edges;
  for (std::size_t k = 0; k <= steps.size(); ++k) states.push_back("u" + std::to_string(k));
  for (std::size_t k = 0; k < steps.size(); ++k) edges.push_back({states[k], {steps[k]}, states[k + 1], bonus});
  return RewardMachine(states, states.front(), {states.back()}, edges);
}

}  // namespace

RewardMachine builtin_machine(const envs::EnvConfig& env, double bonus) {
  if (env.domain == "doorkey") return sequence({"picked_key", "opened_door", "at_goal"}, bonus);
  if (env.domain != "officeworld") throw std::invalid_argument("no reward machine for domain '" + env.domain + "'");
  switch (ow::parse_task(env.task)) {
    case ow::Task::DeliverCoffee:
      return sequence({"got_coffee", "at_office"}, bonus);
    case ow::Task::PatrolAB:
      return sequence({"at_A", "at_B"}, bonus);
    case ow::Task::PatrolABC:
      return sequence({"at_A", "at_B", "at_C"}, bonus);
    case ow::Task::DeliverCoffeeAndMail:
      return RewardMachine({"start", "coffee", "mail", "both", "done"}, "start", {"done"},
                           {{"start", {"got_coffee", "got_mail"}, "both", bonus},
                            {"start", {"got_coffee"}, "coffee", bonus},
                            {"start", {"got_mail"}, "mail", bonus},
                            {"coffee", {"got_mail"}, "both", bonus},
                            {"mail", {"got_coffee"}, "both", bonus},
                            {"both", {"at_office"}, "done", bonus}});
  }
  throw std::invalid_argument("unhandled task");
}

EventSet detect_events(const dk::State& before, int action, const dk::State& after) {
  EventSet ev;
  const auto door_colour = after.at(after.door).color;
  if (action == dk::Pickup && !before.carrying && after.carrying == door_colour) ev.insert("picked_key");
  if (before.at(before.door).door != dk::DoorState::Open && after.at(after.door).door == dk::DoorState::Open) {
    ev.insert("opened_door");
  }
  if (after.success) ev.insert("at_goal");
  return ev;
}

EventSet detect_events(const ow::State& before, int /*action*/, const ow::State& after) {
  EventSet ev;
  if (!before.has_coffee && after.has_coffee) ev.insert("got_coffee");
  if (!before.has_mail && after.has_mail) ev.insert("got_mail");
  if (after.failed) ev.insert("broke_decoration");
  switch (ow::layout::marker(after.agent)) {
    case 'g':
      ev.insert("at_office");
      break;
    case 'a':
      ev.insert("at_A");
      break;
    case 'b':
      ev.insert("at_B");
      break;
    case 'c':
      ev.insert("at_C");
      break;
    case 'd':
      ev.insert("at_D");
      break;
    default:
      break;
  }
  return ev;
}

void MachineAugmenter::reset(const envs::Environment& /*env*/) {
  u_ = machine_.initial();
  before_ = std::monostate{};
}

void MachineAugmenter::before_step(const envs::Environment& env) {
  if (auto* d = dynamic_cast<const dk::DoorKeyEnv*>(&env)) {
    before_ = d->state();
  } else if (auto* o = dynamic_cast<const ow::OfficeWorldEnv*>(&env)) {
    before_ = o->state();
  } else {
    throw std::invalid_argument("no event detector for domain " + env.domain_id());
  }
}

double MachineAugmenter::after_step(const envs::Environment& env, int action, const envs::StepResult& /*result*/) {
  EventSet ev;
  if (auto* d = dynamic_cast<const dk::DoorKeyEnv*>(&env)) {
    ev = detect_events(std::get<dk::State>(before_), action, d->state());
  } else if (auto* o = dynamic_cast<const ow::OfficeWorldEnv*>(&env)) {
    ev = detect_events(std::get<ow::State>(before_), action, o->state());
  } else {
    throw std::invalid_argument("no event detector for domain " + env.domain_id());
  }
  const auto [next, reward] = machine_.step(u_, ev);
  u_ = next;
  return reward;
}

void MachineAugmenter::append_features(neural::Features& features, std::uint32_t base) const {
  features.push_back(base + static_cast<std::uint32_t>(u_));
}

agent::RunMetrics rm_train(const agent::TrainConfig& config, const RewardMachine& machine, std::uint64_t seed,
                           const agent::EpisodeCallback& on_episode) {
  auto cfg = config;
  cfg.variant = agent::Variant::RMDQN;
  MachineAugmenter augmenter(machine);
  return agent::train(cfg, seed, nullptr, &augmenter, on_episode);
}

}  // namespace nesy::rm
