#include "nesy/logic/grounding.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace nesy::logic {

namespace {

Atom substitute(const Atom& atom, const std::map<std::string, std::string>& binding) {
  Atom out(atom.predicate);
  out.args.reserve(atom.args.size());
  for (const auto& t : atom.args) {
    out.args.push_back(t.is_variable() ? Term::constant(binding.at(t.name)) : t);
  }
  return out;
}

Rule substitute(const Rule& rule, const std::map<std::string, std::string>& binding) {
  Rule out;
  out.head = substitute(rule.head, binding);
  out.pos_body.reserve(rule.pos_body.size());
  for (const auto& a : rule.pos_body) out.pos_body.push_back(substitute(a, binding));
  out.neg_body.reserve(rule.neg_body.size());
  for (const auto& a : rule.neg_body) out.neg_body.push_back(substitute(a, binding));
  return out;
}

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp--) r *= base;
  return r;
}

}  // namespace

std::vector<Rule> ground_rule(const Rule& rule, const ConstantDomain& domain) {
  const auto vars = rule_variables(rule);
  if (vars.empty()) return {rule};
  if (domain.empty()) return {};

  const std::vector<std::string> constants(domain.begin(), domain.end());
  std::vector<std::size_t> digits(vars.size(), 0);
  std::vector<Rule> out;
  out.reserve(ipow(constants.size(), vars.size()));
  std::map<std::string, std::string> binding;
  while (true) {
    for (std::size_t i = 0; i < vars.size(); ++i) binding[vars[i]] = constants[digits[i]];
    out.push_back(substitute(rule, binding));
    // odometer increment, last variable fastest
    std::size_t i = vars.size();
    while (i > 0) {
      --i;
      if (++digits[i] < constants.size()) break;
      digits[i] = 0;
      if (i == 0) return out;
    }
  }
}

std::size_t ground_instance_count(const Rule& rule, std::size_t domain_size) {
  return ipow(domain_size, rule_variables(rule).size());
}

std::size_t verification_cost(const Program& program, std::size_t domain_size) {
  std::size_t total = 0;
  for (const auto& r : program.rules()) total += ground_instance_count(r, domain_size) * r.body_size();
  return total;
}

// ---------------------------------------------------------------------------

std::size_t GroundProgram::AtomHash::operator()(const Atom& a) const {
  std::size_t h = std::hash<std::string>{}(a.predicate);
  for (const auto& t : a.args) h = h * 1000003u ^ std::hash<std::string>{}(t.name);
  return h;
}

std::uint32_t GroundProgram::intern(const Atom& atom) {
  auto [it, inserted] = ids_.try_emplace(atom, static_cast<std::uint32_t>(atoms_.size()));
  if (inserted) atoms_.push_back(atom);
  return it->second;
}

GroundProgram precompute_groundings(const Program& program, const ConstantDomain& domain) {
  GroundProgram gp;
  gp.domain_ = domain;
  gp.domain_.insert(program.constants().begin(), program.constants().end());
  gp.heads_ = program.head_predicates();
  for (const auto& sig : program.body_predicates()) gp.body_predicate_names_.insert(sig.name);

  // Group ground instances by stratum so evaluation can walk contiguous ranges.
  std::vector<std::vector<Rule>> by_stratum(program.stratum_count());
  for (std::size_t i = 0; i < program.rules().size(); ++i) {
    auto instances = ground_rule(program.rules()[i], gp.domain_);
    auto& bucket = by_stratum[program.rule_strata()[i]];
    bucket.insert(bucket.end(), std::make_move_iterator(instances.begin()), std::make_move_iterator(instances.end()));
  }

  std::vector<Rule> flat;
  for (auto& bucket : by_stratum) {
    const std::size_t begin = gp.rules_.size();
    for (auto& r : bucket) {
      GroundProgram::CompiledRule c;
      c.head = gp.intern(r.head);
      for (const auto& a : r.pos_body) c.pos.push_back(gp.intern(a));
      for (const auto& a : r.neg_body) c.neg.push_back(gp.intern(a));
      gp.rules_.push_back(std::move(c));
      flat.push_back(std::move(r));
    }
    gp.strata_.emplace_back(begin, gp.rules_.size());
  }
  gp.ground_ = program.rules().empty() ? Program() : Program(std::move(flat));
  return gp;
}

std::set<Atom> GroundProgram::entailed(const FactSet& facts, EvalStats* stats) const {
  std::vector<char> truth(atoms_.size(), 0);
  std::set<Atom> result;

  for (const auto& f : facts) {
    auto it = ids_.find(f);
    if (it != ids_.end()) {
      truth[it->second] = 1;
    } else if (body_predicate_names_.contains(f.predicate)) {
      for (const auto& t : f.args) {
        if (!domain_.contains(t.name)) {
          throw DomainCoverageError("fact " + to_string(f) + " mentions constant '" + t.name +
                                    "' outside the grounding domain");
        }
      }
    }
    // Facts that are heads but never occur in the grounding are still part of the model.
    if (heads_.contains(f.signature())) result.insert(f);
  }

  EvalStats local;
  for (const auto& [begin, end] : strata_) {
    bool changed = true;
    while (changed) {
      changed = false;
      ++local.passes;
      for (std::size_t i = begin; i < end; ++i) {
        const auto& r = rules_[i];
        ++local.ground_instances;
        if (truth[r.head]) continue;
        bool holds = true;
        for (auto p : r.pos) {
          ++local.literals_checked;
          if (!truth[p]) {
            holds = false;
            break;
          }
        }
        if (holds) {
          for (auto n : r.neg) {
            ++local.literals_checked;
            if (truth[n]) {
              holds = false;
              break;
            }
          }
        }
        if (holds) {
          truth[r.head] = 1;
          changed = true;
        }
      }
    }
  }
  if (stats) *stats += local;

  for (std::size_t id = 0; id < atoms_.size(); ++id) {
    if (truth[id] && heads_.contains(atoms_[id].signature())) result.insert(atoms_[id]);
  }
  return result;
}

}  // namespace nesy::logic
