#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nesy/logic/syntax.hpp"

namespace nesy::bridge {

/// Predicate vocabularies of one domain. `actions` are executable (mapped to
/// MDP actions); `intents` are derived action terms such as goto(X) that are
/// refined by further rules and never executed directly.
struct ActionVocabulary {
  std::set<logic::Signature> actions;
  std::set<logic::Signature> intents;
  std::set<logic::Signature> features;

  /// Throws std::invalid_argument unless the three sets are pairwise disjoint.
  void validate() const;
  bool is_action(const logic::Signature& s) const { return actions.contains(s); }
};

class UnmappedAtomError : public std::runtime_error {
 public:
  explicit UnmappedAtomError(const logic::Atom& atom);
  const logic::Atom& atom() const { return atom_; }

 private:
  logic::Atom atom_;
};

/// Preimage table of the action map: ground action atom -> MDP action indices.
class ActionMap {
 public:
  ActionMap() = default;
  ActionMap(std::string domain_id, std::vector<std::string> action_names);

  /// Throws std::invalid_argument for a non-ground atom, an empty or
  /// out-of-range action set.
  void add(const logic::Atom& atom, std::set<int> actions);

  const std::string& domain_id() const { return domain_id_; }
  const std::vector<std::string>& action_names() const { return action_names_; }
  int action_count() const { return static_cast<int>(action_names_.size()); }
  const std::map<logic::Atom, std::set<int>>& table() const { return table_; }
  bool maps(const logic::Atom& atom) const { return table_.contains(atom); }

  /// Union of the mapped index sets; throws UnmappedAtomError for any atom
  /// without an entry.
  std::set<int> actions_from_atoms(const std::set<logic::Atom>& atoms) const;

 private:
  std::string domain_id_;
  std::vector<std::string> action_names_;
  std::map<logic::Atom, std::set<int>> table_;
};

/// Reads {"domain": ..., "actions": {"<atom>": ["<action name>", ...]}}.
/// `action_names` are the environment's actions used to resolve names. A key
/// with variables, e.g. "pickup(X)", stands for all its groundings over
/// `constants`.
ActionMap load_action_map(const std::filesystem::path& path, const std::vector<std::string>& action_names,
                          const std::set<std::string>& constants = {});
ActionMap action_map_from_json_text(const std::string& text, const std::vector<std::string>& action_names,
                                    const std::set<std::string>& constants = {});

}  // namespace nesy::bridge
