#include "nesy/bridge/action_map.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nesy/logic/grounding.hpp"

namespace nesy::bridge {

void ActionVocabulary::validate() const {
  auto overlap = [](const std::set<logic::Signature>& a, const std::set<logic::Signature>& b) {
    for (const auto& s : a)
      if (b.contains(s)) return true;
    return false;
  };
  if (overlap(actions, features) || overlap(intents, features) || overlap(actions, intents)) {
    throw std::invalid_argument("action, intent and feature vocabularies must be disjoint");
  }
}

UnmappedAtomError::UnmappedAtomError(const logic::Atom& atom)
    : std::runtime_error("action atom " + logic::to_string(atom) + " has no MDP action (action map is not surjective)"),
      atom_(atom) {}

ActionMap::ActionMap(std::string domain_id, std::vector<std::string> action_names)
    : domain_id_(std::move(domain_id)), action_names_(std::move(action_names)) {}

void ActionMap::add(const logic::Atom& atom, std::set<int> actions) {
  if (!atom.is_ground()) throw std::invalid_argument("action map key is not ground: " + logic::to_string(atom));
  if (actions.empty()) throw std::invalid_argument("action map entry for " + logic::to_string(atom) + " is empty");
  for (int a : actions) {
    if (a < 0 || a >= action_count()) {
      throw std::invalid_argument("action index " + std::to_string(a) + " out of range for " + domain_id_);
    }
  }
  table_[atom] = std::move(actions);
}

std::set<int> ActionMap::actions_from_atoms(const std::set<logic::Atom>& atoms) const {
  std::set<int> out;
  for (const auto& atom : atoms) {
    auto it = table_.find(atom);
    if (it == table_.end()) throw UnmappedAtomError(atom);
    out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

ActionMap action_map_from_json_text(const std::string& text, const std::vector<std::string>& action_names,
                                    const std::set<std::string>& constants) {
  const auto doc = nlohmann::json::parse(text);
  ActionMap map(doc.at("domain").get<std::string>(), action_names);
  for (const auto& [key, value] : doc.at("actions").items()) {
    std::set<int> indices;
    for (const auto& name : value) {
      const auto n = name.get<std::string>();
      auto it = std::find(action_names.begin(), action_names.end(), n);
      if (it == action_names.end()) throw std::invalid_argument("action map: unknown action name '" + n + "'");
      indices.insert(static_cast<int>(it - action_names.begin()));
    }
    const auto atom = logic::parse_atom(key);
    if (atom.is_ground()) {
      map.add(atom, std::move(indices));
      continue;
    }
    logic::Rule pattern;
    pattern.head = atom;
    for (const auto& g : logic::ground_rule(pattern, constants)) map.add(g.head, indices);
  }
  return map;
}

ActionMap load_action_map(const std::filesystem::path& path, const std::vector<std::string>& action_names,
                          const std::set<std::string>& constants) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open action map file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return action_map_from_json_text(buf.str(), action_names, constants);
}

}  // namespace nesy::bridge
