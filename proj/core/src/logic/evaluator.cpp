#include "nesy/logic/evaluator.hpp"

#include <vector>

namespace nesy::logic {

std::set<Atom> entailed_actions(const Program& program, const FactSet& facts, EvalStats* stats) {
  ConstantDomain domain = program.constants();
  for (auto& c : facts.constants()) domain.insert(std::move(c));

  std::vector<std::vector<Rule>> strata(program.stratum_count());
  for (std::size_t i = 0; i < program.rules().size(); ++i) {
    auto instances = ground_rule(program.rules()[i], domain);
    auto& bucket = strata[program.rule_strata()[i]];
    bucket.insert(bucket.end(), std::make_move_iterator(instances.begin()), std::make_move_iterator(instances.end()));
  }

  std::set<Atom> model(facts.begin(), facts.end());
  EvalStats local;
  for (const auto& rules : strata) {
    bool changed = true;
    while (changed) {
      changed = false;
      ++local.passes;
      for (const auto& r : rules) {
        ++local.ground_instances;
        bool holds = true;
        for (const auto& a : r.pos_body) {
          ++local.literals_checked;
          holds = holds && model.contains(a);
        }
        for (const auto& a : r.neg_body) {
          ++local.literals_checked;
          holds = holds && !model.contains(a);
        }
        if (holds && model.insert(r.head).second) changed = true;
      }
    }
  }
  if (stats) *stats += local;

  std::set<Atom> result;
  const auto& heads = program.head_predicates();
  for (const auto& a : model)
    if (heads.contains(a.signature())) result.insert(a);
  return result;
}

}  // namespace nesy::logic
