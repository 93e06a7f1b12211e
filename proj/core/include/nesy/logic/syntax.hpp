#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nesy::logic {

/// A variable (leading uppercase letter or '_') or a constant symbol.
struct Term {
  enum class Kind { Variable, Constant };

  Kind kind = Kind::Constant;
  std::string name;

  static Term variable(std::string name);
  static Term constant(std::string name);

  bool is_variable() const { return kind == Kind::Variable; }

  auto operator<=>(const Term&) const = default;
};

/// Predicate identity: name plus arity.
struct Signature {
  std::string name;
  std::size_t arity = 0;

  auto operator<=>(const Signature&) const = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  Atom() = default;
  Atom(std::string predicate, std::vector<Term> args = {});

  Signature signature() const { return {predicate, args.size()}; }
  bool is_ground() const;

  auto operator<=>(const Atom&) const = default;
};

/// Builds a ground atom from constant names, e.g. ground_atom("samecolor", {"k1", "d1"}).
Atom ground_atom(std::string predicate, const std::vector<std::string>& constants = {});

struct Rule {
  Atom head;
  std::vector<Atom> pos_body;
  std::vector<Atom> neg_body;

  bool is_fact() const { return pos_body.empty() && neg_body.empty(); }
  std::size_t body_size() const { return pos_body.size() + neg_body.size(); }
  bool is_ground() const;

  auto operator<=>(const Rule&) const = default;
};

/// Distinct variable names of a rule in first-occurrence order (head, positive body, negative body).
std::vector<std::string> rule_variables(const Rule& rule);

/// Validated normal program: safe rules, consistent arities, stratified negation.
class Program {
 public:
  Program() = default;

  /// Validates and takes ownership of the rules. Throws UnsafeRuleError,
  /// ArityError or StratificationError.
  explicit Program(std::vector<Rule> rules);

  const std::vector<Rule>& rules() const { return rules_; }
  const std::set<std::string>& constants() const { return constants_; }

  /// Predicates occurring as a rule head.
  const std::set<Signature>& head_predicates() const { return head_predicates_; }
  /// Predicates occurring in some rule body.
  const std::set<Signature>& body_predicates() const { return body_predicates_; }

  /// Stratum index per rule; strata are evaluated in increasing order.
  const std::vector<std::size_t>& rule_strata() const { return rule_strata_; }
  std::size_t stratum_count() const { return stratum_count_; }

  bool empty() const { return rules_.empty(); }

 private:
  std::vector<Rule> rules_;
  std::set<std::string> constants_;
  std::set<Signature> head_predicates_;
  std::set<Signature> body_predicates_;
  std::vector<std::size_t> rule_strata_;
  std::size_t stratum_count_ = 0;
};

/// A set of ground atoms, kept ordered so that iteration is deterministic.
class FactSet {
 public:
  FactSet() = default;
  FactSet(std::initializer_list<Atom> atoms);

  /// Throws std::invalid_argument for a non-ground atom.
  void insert(Atom atom);
  bool contains(const Atom& atom) const { return facts_.contains(atom); }
  std::size_t size() const { return facts_.size(); }
  bool empty() const { return facts_.empty(); }

  std::set<std::string> constants() const;

  auto begin() const { return facts_.begin(); }
  auto end() const { return facts_.end(); }

  bool operator==(const FactSet&) const = default;

 private:
  std::set<Atom> facts_;
};

class LogicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public LogicError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class UnsafeRuleError : public LogicError {
 public:
  UnsafeRuleError(std::string variable, const std::string& rule_text);
  const std::string& variable() const { return variable_; }

 private:
  std::string variable_;
};

class StratificationError : public LogicError {
 public:
  explicit StratificationError(std::vector<std::string> cycle);
  /// Predicates (name/arity) forming the offending dependency cycle.
  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

class ArityError : public LogicError {
 public:
  using LogicError::LogicError;
};

class DomainCoverageError : public LogicError {
 public:
  using LogicError::LogicError;
};

Program parse_program(std::string_view source);
/// Parses "pred(a,b)" or "pred" into a single atom (no trailing period).
Atom parse_atom(std::string_view text);
FactSet parse_facts(std::string_view source);

std::string to_string(const Term& term);
std::string to_string(const Atom& atom);
std::string to_string(const Signature& sig);
std::string to_string(const Rule& rule);
/// One rule per line; byte-stable for a fixed rule order.
std::string to_string(const Program& program);

}  // namespace nesy::logic
