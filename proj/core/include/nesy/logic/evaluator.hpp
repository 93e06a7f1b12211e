#pragma once

#include <set>

#include "nesy/logic/grounding.hpp"
#include "nesy/logic/syntax.hpp"

namespace nesy::logic {

/// Ground atoms of head predicates true in the unique stratified model of
/// `program` extended with `facts`.
///
/// Rules are grounded on the fly over the constants of the program and the
/// fact set, then evaluated stratum by stratum to fixpoint. Every literal of
/// every ground instance is checked on each pass, so `stats` reports exactly
/// passes * sum(N^v * |body|) literal checks for the rules of each stratum.
///
/// Intermediate heads (e.g. goto(X) feeding directional rules) are part of the
/// result; restricting to an action vocabulary is the caller's job.
std::set<Atom> entailed_actions(const Program& program, const FactSet& facts, EvalStats* stats = nullptr);

}  // namespace nesy::logic
