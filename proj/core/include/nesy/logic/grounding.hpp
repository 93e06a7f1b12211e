#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "nesy/logic/syntax.hpp"

namespace nesy::logic {

using ConstantDomain = std::set<std::string>;

/// Work counters for one evaluation: ground instances visited and body literals
/// whose truth was looked up. Summed over all fixpoint passes.
struct EvalStats {
  std::size_t passes = 0;
  std::size_t ground_instances = 0;
  std::size_t literals_checked = 0;

  EvalStats& operator+=(const EvalStats& o) {
    passes += o.passes;
    ground_instances += o.ground_instances;
    literals_checked += o.literals_checked;
    return *this;
  }
};

/// Every substitution of the rule's variables by domain constants, enumerated
/// in lexicographic order of the domain. A variable-free rule yields itself.
std::vector<Rule> ground_rule(const Rule& rule, const ConstantDomain& domain);

/// N^v for a rule with v distinct variables over N constants.
std::size_t ground_instance_count(const Rule& rule, std::size_t domain_size);

/// Sum over rules of N^v * |body|: the cost of checking every literal of every
/// ground instance once.
std::size_t verification_cost(const Program& program, std::size_t domain_size);

/// A program grounded ahead of time over a fixed constant domain, compiled to
/// integer atom ids for repeated evaluation against changing fact sets.
class GroundProgram {
 public:
  GroundProgram() = default;

  const Program& program() const { return ground_; }
  const ConstantDomain& domain() const { return domain_; }
  std::size_t instance_count() const { return rules_.size(); }

  /// Atoms with a head predicate that hold in the stratified model of
  /// facts + program. Throws DomainCoverageError if a fact relevant to the
  /// program mentions a constant outside the grounding domain.
  std::set<Atom> entailed(const FactSet& facts, EvalStats* stats = nullptr) const;

 private:
  friend GroundProgram precompute_groundings(const Program& program, const ConstantDomain& domain);

  struct CompiledRule {
    std::uint32_t head;
    std::vector<std::uint32_t> pos;
    std::vector<std::uint32_t> neg;
  };

  struct AtomHash {
    std::size_t operator()(const Atom& a) const;
  };

  std::uint32_t intern(const Atom& atom);

  Program ground_;
  ConstantDomain domain_;
  std::set<Signature> heads_;
  std::set<std::string> body_predicate_names_;
  std::vector<Atom> atoms_;
  std::unordered_map<Atom, std::uint32_t, AtomHash> ids_;
  std::vector<CompiledRule> rules_;
  // rules_ index range per stratum
  std::vector<std::pair<std::size_t, std::size_t>> strata_;
};

GroundProgram precompute_groundings(const Program& program, const ConstantDomain& domain);

}  // namespace nesy::logic
