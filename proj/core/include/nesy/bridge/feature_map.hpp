#pragma once

#include <set>
#include <string>
#include <vector>

#include "nesy/bridge/action_map.hpp"
#include "nesy/envs/doorkey.hpp"
#include "nesy/envs/environment.hpp"
#include "nesy/envs/office_world.hpp"
#include "nesy/logic/evaluator.hpp"
#include "nesy/logic/grounding.hpp"

namespace nesy::bridge {

/// DoorKey facts from the agent's egocentric view and inventory.
///
/// Objects are named by type and colour (k_yellow, d_yellow) and the goal is
/// `g`. Only objects inside the occluded 7x7 view produce facts; a carried key
/// is always known. For every visible key, door and goal the first moves of a
/// shortest plan are emitted as on_left/on_right/straight, and facing(X) when
/// the agent already looks at a key or door.
logic::FactSet extract_facts(const envs::doorkey::State& state);

/// OfficeWorld facts: coffee(c1), coffee(c2), mail(m), office(o), hasCoffee,
/// hasMail, visited(R) or visited(none), shortest-path directions to every
/// landmark (on_left = left, on_right = right, straight = up, behind = down)
/// and blocked(Dir) when a decoration is adjacent in that direction.
logic::FactSet extract_facts(const envs::office::State& state);

/// Dispatches on `domain_id`; throws std::invalid_argument for an unknown
/// domain or an environment of another domain.
logic::FactSet extract_facts(const std::string& domain_id, const envs::Environment& env);

/// Everything the symbolic side needs to know about one domain.
struct DomainBridge {
  std::string domain_id;
  ActionVocabulary vocabulary;
  ActionMap action_map;
  logic::ConstantDomain constants;  ///< every constant the feature map can emit
};

/// Built-in vocabulary, action map and constants for "doorkey" or "officeworld".
DomainBridge builtin_bridge(const std::string& domain_id);

struct SurjectivityReport {
  std::vector<logic::Atom> unmapped;  ///< ground heads without an MDP action, sorted
  bool ok() const { return unmapped.empty(); }
};

/// Enumerates every ground head the program can produce over the domain
/// constants and checks that each executable one maps to at least one MDP
/// action. Intent heads are exempt; heads outside the action vocabulary are
/// reported.
SurjectivityReport validate_surjective(const DomainBridge& bridge, const logic::Program& program);

/// Entailed atoms of an action predicate mapped through the action map.
/// Intent atoms are filtered out before mapping.
std::set<int> actions_from_atoms(const DomainBridge& bridge, const std::set<logic::Atom>& atoms);

/// Partial logical policy bound to a domain: state -> suggested MDP actions.
class PolicyAdvisor {
 public:
  enum class Grounding { Precomputed, OnTheFly };

  PolicyAdvisor(logic::Program program, DomainBridge bridge, Grounding mode = Grounding::Precomputed);

  const logic::Program& program() const { return program_; }
  const DomainBridge& bridge() const { return bridge_; }

  std::set<logic::Atom> entailed(const logic::FactSet& facts, logic::EvalStats* stats = nullptr) const;
  std::set<int> suggest(const logic::FactSet& facts, logic::EvalStats* stats = nullptr) const;
  std::set<int> suggest(const envs::Environment& env, logic::EvalStats* stats = nullptr) const;

 private:
  logic::Program program_;
  DomainBridge bridge_;
  Grounding mode_;
  logic::GroundProgram ground_;
};

}  // namespace nesy::bridge
