#include "nesy/bridge/feature_map.hpp"

#include <map>

#include "nesy/bridge/navigation.hpp"

namespace nesy::bridge {

namespace dk = envs::doorkey;
namespace ow = envs::office;
using logic::Atom;
using logic::ground_atom;

namespace {

std::string key_name(dk::Color c) { return std::string("k_") + dk::color_name(c); }
std::string door_name(dk::Color c) { return std::string("d_") + dk::color_name(c); }

const char* doorkey_direction(int action) {
  switch (action) {
    case dk::Left:
      return "on_left";
    case dk::Right:
      return "on_right";
    default:
      return "straight";
  }
}

const char* office_direction(int action) {
  switch (action) {
    case ow::Left:
      return "on_left";
    case ow::Right:
      return "on_right";
    case ow::Up:
      return "straight";
    default:
      return "behind";
  }
}

const char* office_heading_constant(int action) {
  switch (action) {
    case ow::Left:
      return "left";
    case ow::Right:
      return "right";
    case ow::Up:
      return "forward";
    default:
      return "backward";
  }
}

}  // namespace

logic::FactSet extract_facts(const dk::State& s) {
  logic::FactSet facts;
  const auto mask = dk::visible_cells(s);

  struct Target {
    envs::GridPos pos;
    std::string name;
    navigation::Goal goal;
  };
  std::vector<Target> targets;
  std::map<dk::Color, std::string> doors;  // visible doors by colour
  std::map<dk::Color, std::string> keys;   // visible or carried keys by colour

  for (int j = 0; j < dk::kViewSize; ++j) {
    for (int i = 0; i < dk::kViewSize; ++i) {
      if (!mask[static_cast<std::size_t>(j * dk::kViewSize + i)]) continue;
      if (i == dk::kViewSize / 2 && j == dk::kViewSize - 1) continue;
      const auto p = dk::view_to_world(s.agent, s.heading, i, j);
      if (!s.in_bounds(p)) continue;
      const auto cell = s.at(p);
      switch (cell.object) {
        case dk::Object::Key: {
          const auto name = key_name(cell.color);
          facts.insert(ground_atom("key", {name}));
          keys[cell.color] = name;
          targets.push_back({p, name, navigation::Goal::Face});
          break;
        }
        case dk::Object::Door: {
          const auto name = door_name(cell.color);
          facts.insert(ground_atom("door", {name}));
          if (cell.door == dk::DoorState::Locked) facts.insert(ground_atom("locked", {name}));
          doors[cell.color] = name;
          targets.push_back({p, name, navigation::Goal::Face});
          break;
        }
        case dk::Object::Goal:
          facts.insert(ground_atom("goal", {"g"}));
          targets.push_back({p, "g", navigation::Goal::Stand});
          break;
        default:
          break;
      }
    }
  }

  if (s.carrying) {
    const auto name = key_name(*s.carrying);
    facts.insert(ground_atom("key", {name}));
    facts.insert(ground_atom("carrying", {name}));
    keys[*s.carrying] = name;
  } else {
    facts.insert(ground_atom("notcarrying"));
  }
  if (s.at(s.door).object == dk::Object::Door && s.at(s.door).door == dk::DoorState::Open) {
    facts.insert(ground_atom("unlocked"));
  }
  for (const auto& [colour, door] : doors) {
    auto it = keys.find(colour);
    if (it == keys.end()) continue;
    facts.insert(ground_atom("samecolor", {it->second, door}));
    facts.insert(ground_atom("samecolor", {door, it->second}));
  }

  for (const auto& t : targets) {
    bool reached = false;
    for (int move : navigation::doorkey_first_moves(s, t.pos, t.goal, &reached)) {
      facts.insert(ground_atom(doorkey_direction(move), {t.name}));
    }
    if (reached && t.goal == navigation::Goal::Face) facts.insert(ground_atom("facing", {t.name}));
  }
  return facts;
}

logic::FactSet extract_facts(const ow::State& s) {
  logic::FactSet facts;
  std::vector<std::pair<envs::GridPos, std::string>> landmarks;
  const auto coffee = ow::layout::cells_with('f');
  for (std::size_t i = 0; i < coffee.size(); ++i) {
    const auto name = "c" + std::to_string(i + 1);
    facts.insert(ground_atom("coffee", {name}));
    landmarks.emplace_back(coffee[i], name);
  }
  for (auto p : ow::layout::cells_with('e')) {
    facts.insert(ground_atom("mail", {"m"}));
    landmarks.emplace_back(p, "m");
  }
  for (auto p : ow::layout::cells_with('g')) {
    facts.insert(ground_atom("office", {"o"}));
    landmarks.emplace_back(p, "o");
  }
  for (char room : {'a', 'b', 'c', 'd'}) {
    for (auto p : ow::layout::cells_with(room)) landmarks.emplace_back(p, std::string(1, room));
  }

  if (s.has_coffee) facts.insert(ground_atom("hasCoffee"));
  if (s.has_mail) facts.insert(ground_atom("hasMail"));
  if (s.visited.empty()) facts.insert(ground_atom("visited", {"none"}));
  for (char room : s.visited) facts.insert(ground_atom("visited", {std::string(1, room)}));

  for (const auto& [pos, name] : landmarks) {
    for (int move : navigation::office_first_moves(s, pos)) facts.insert(ground_atom(office_direction(move), {name}));
  }
  for (int a = ow::Left; a <= ow::Down; ++a) {
    if (ow::layout::wall_blocks(s.agent, a)) continue;
    if (ow::layout::marker(ow::layout::moved(s.agent, a)) == 'n') {
      facts.insert(ground_atom("blocked", {office_heading_constant(a)}));
    }
  }
  return facts;
}

logic::FactSet extract_facts(const std::string& domain_id, const envs::Environment& env) {
  if (domain_id == "doorkey") {
    if (auto* e = dynamic_cast<const dk::DoorKeyEnv*>(&env)) return extract_facts(e->state());
  } else if (domain_id == "officeworld") {
    if (auto* e = dynamic_cast<const ow::OfficeWorldEnv*>(&env)) return extract_facts(e->state());
  } else {
    throw std::invalid_argument("unknown domain '" + domain_id + "'");
  }
  throw std::invalid_argument("environment of domain '" + env.domain_id() + "' passed as '" + domain_id + "'");
}

// ---------------------------------------------------------------------------

DomainBridge builtin_bridge(const std::string& domain_id) {
  using logic::Signature;
  DomainBridge b;
  b.domain_id = domain_id;
  if (domain_id == "doorkey") {
    const std::vector<std::string> names{"left", "right", "forward", "pickup", "open"};
    b.vocabulary.actions = {{"left", 0}, {"right", 0}, {"forward", 0}, {"pickup", 1}, {"open", 1}};
    b.vocabulary.intents = {{"goto", 1}};
    b.vocabulary.features = {{"key", 1},      {"door", 1},    {"goal", 1},     {"samecolor", 2},
                             {"locked", 1},   {"unlocked", 0}, {"carrying", 1}, {"notcarrying", 0},
                             {"on_left", 1},  {"on_right", 1}, {"straight", 1}, {"facing", 1}};
    b.action_map = ActionMap(domain_id, names);
    b.action_map.add(ground_atom("left"), {dk::Left});
    b.action_map.add(ground_atom("right"), {dk::Right});
    b.action_map.add(ground_atom("forward"), {dk::Forward});
    b.constants.insert("g");
    for (int c = 0; c < dk::kColorCount; ++c) {
      const auto colour = static_cast<dk::Color>(c);
      b.constants.insert(key_name(colour));
      b.constants.insert(door_name(colour));
    }
    // pickup/open name their object, but the MDP action is the same for any argument.
    for (const auto& c : b.constants) {
      b.action_map.add(ground_atom("pickup", {c}), {dk::Pickup});
      b.action_map.add(ground_atom("open", {c}), {dk::Open});
    }
  } else if (domain_id == "officeworld") {
    const std::vector<std::string> names{"left", "right", "up", "down"};
    b.vocabulary.actions = {{"left", 0}, {"right", 0}, {"forward", 0}, {"backward", 0}};
    b.vocabulary.intents = {{"goto", 1}};
    b.vocabulary.features = {{"coffee", 1},   {"mail", 1},     {"office", 1},   {"hasCoffee", 0},
                             {"hasMail", 0},  {"hittingDecoration", 0},         {"visited", 1},
                             {"on_left", 1},  {"on_right", 1}, {"straight", 1}, {"behind", 1},
                             {"blocked", 1}};
    b.action_map = ActionMap(domain_id, names);
    b.action_map.add(ground_atom("left"), {ow::Left});
    b.action_map.add(ground_atom("right"), {ow::Right});
    b.action_map.add(ground_atom("forward"), {ow::Up});
    b.action_map.add(ground_atom("backward"), {ow::Down});
    b.constants = {"a", "b", "c", "d", "c1", "c2", "m", "o", "none", "left", "right", "forward", "backward"};
  } else {
    throw std::invalid_argument("unknown domain '" + domain_id + "'");
  }
  b.vocabulary.validate();
  return b;
}

SurjectivityReport validate_surjective(const DomainBridge& bridge, const logic::Program& program) {
  logic::ConstantDomain domain = bridge.constants;
  domain.insert(program.constants().begin(), program.constants().end());

  std::set<Atom> unmapped;
  for (const auto& rule : program.rules()) {
    if (bridge.vocabulary.intents.contains(rule.head.signature())) continue;
    const bool executable = bridge.vocabulary.is_action(rule.head.signature());
    logic::Rule head_only;
    head_only.head = rule.head;
    for (const auto& instance : logic::ground_rule(head_only, domain)) {
      if (!executable || !bridge.action_map.maps(instance.head)) unmapped.insert(instance.head);
    }
  }
  return SurjectivityReport{{unmapped.begin(), unmapped.end()}};
}

std::set<int> actions_from_atoms(const DomainBridge& bridge, const std::set<Atom>& atoms) {
  std::set<Atom> executable;
  for (const auto& a : atoms)
    if (!bridge.vocabulary.intents.contains(a.signature())) executable.insert(a);
  return bridge.action_map.actions_from_atoms(executable);
}

// ---------------------------------------------------------------------------

PolicyAdvisor::PolicyAdvisor(logic::Program program, DomainBridge bridge, Grounding mode)
    : program_(std::move(program)), bridge_(std::move(bridge)), mode_(mode) {
  if (mode_ == Grounding::Precomputed) ground_ = logic::precompute_groundings(program_, bridge_.constants);
}

std::set<Atom> PolicyAdvisor::entailed(const logic::FactSet& facts, logic::EvalStats* stats) const {
  if (mode_ == Grounding::Precomputed) return ground_.entailed(facts, stats);
  return logic::entailed_actions(program_, facts, stats);
}

std::set<int> PolicyAdvisor::suggest(const logic::FactSet& facts, logic::EvalStats* stats) const {
  return actions_from_atoms(bridge_, entailed(facts, stats));
}

std::set<int> PolicyAdvisor::suggest(const envs::Environment& env, logic::EvalStats* stats) const {
  return suggest(extract_facts(bridge_.domain_id, env), stats);
}

}  // namespace nesy::bridge
