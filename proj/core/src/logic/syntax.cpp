#include "nesy/logic/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace nesy::logic {

namespace {

bool starts_variable(std::string_view name) {
  return !name.empty() && (std::isupper(static_cast<unsigned char>(name.front())) || name.front() == '_');
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

Term Term::variable(std::string name) {
  if (name.empty()) throw std::invalid_argument("empty variable name");
  return Term{Kind::Variable, std::move(name)};
}

Term Term::constant(std::string name) {
  if (name.empty()) throw std::invalid_argument("empty constant name");
  return Term{Kind::Constant, std::move(name)};
}

Atom::Atom(std::string predicate_, std::vector<Term> args_)
    : predicate(std::move(predicate_)), args(std::move(args_)) {}

bool Atom::is_ground() const {
  return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

Atom ground_atom(std::string predicate, const std::vector<std::string>& constants) {
  std::vector<Term> args;
  args.reserve(constants.size());
  for (const auto& c : constants) args.push_back(Term::constant(c));
  return Atom(std::move(predicate), std::move(args));
}

bool Rule::is_ground() const {
  auto ground = [](const Atom& a) { return a.is_ground(); };
  return head.is_ground() && std::all_of(pos_body.begin(), pos_body.end(), ground) &&
         std::all_of(neg_body.begin(), neg_body.end(), ground);
}

std::vector<std::string> rule_variables(const Rule& rule) {
  std::vector<std::string> vars;
  auto collect = [&vars](const Atom& atom) {
    for (const auto& t : atom.args) {
      if (t.is_variable() && std::find(vars.begin(), vars.end(), t.name) == vars.end()) {
        vars.push_back(t.name);
      }
    }
  };
  collect(rule.head);
  for (const auto& a : rule.pos_body) collect(a);
  for (const auto& a : rule.neg_body) collect(a);
  return vars;
}

// ---------------------------------------------------------------------------
// Errors

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : LogicError("parse error at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                 message),
      line_(line),
      column_(column) {}

UnsafeRuleError::UnsafeRuleError(std::string variable, const std::string& rule_text)
    : LogicError("unsafe rule: variable " + variable + " does not occur in a positive body literal of '" +
                 rule_text + "'"),
      variable_(std::move(variable)) {}

namespace {
std::string join_cycle(const std::vector<std::string>& cycle) {
  std::string out;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (i) out += " -> ";
    out += cycle[i];
  }
  return out;
}
}  // namespace

StratificationError::StratificationError(std::vector<std::string> cycle)
    : LogicError("program is not stratified: negation inside dependency cycle " + join_cycle(cycle)),
      cycle_(std::move(cycle)) {}

// ---------------------------------------------------------------------------
// Program validation

namespace {

void check_safety(const Rule& rule) {
  std::set<std::string> bound;
  for (const auto& a : rule.pos_body)
    for (const auto& t : a.args)
      if (t.is_variable()) bound.insert(t.name);
  auto check = [&](const Atom& a) {
    for (const auto& t : a.args)
      if (t.is_variable() && !bound.contains(t.name)) throw UnsafeRuleError(t.name, to_string(rule));
  };
  check(rule.head);
  for (const auto& a : rule.neg_body) check(a);
}

struct DependencyGraph {
  std::vector<Signature> nodes;
  std::map<Signature, std::size_t> index;
  // edge (from body predicate) -> (to head predicate), negative flag
  std::vector<std::vector<std::pair<std::size_t, bool>>> out;

  std::size_t node(const Signature& s) {
    auto [it, inserted] = index.try_emplace(s, nodes.size());
    if (inserted) {
      nodes.push_back(s);
      out.emplace_back();
    }
    return it->second;
  }
};

// Tarjan's algorithm; returns component id per node in reverse topological order
// (a component's id is smaller than the ids of components it reaches).
std::vector<std::size_t> strongly_connected(const DependencyGraph& g, std::size_t& component_count) {
  const std::size_t n = g.nodes.size();
  std::vector<std::size_t> comp(n, SIZE_MAX), low(n), order(n, SIZE_MAX);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  component_count = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    order[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto [w, neg] : g.out[v]) {
      (void)neg;
      if (order[w] == SIZE_MAX) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], order[w]);
      }
    }
    if (low[v] == order[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = component_count;
      } while (w != v);
      ++component_count;
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (order[v] == SIZE_MAX) visit(v);
  return comp;
}

// Shortest path inside one component from `from` to `to` (used to name a cycle).
std::vector<std::size_t> path_within(const DependencyGraph& g, const std::vector<std::size_t>& comp,
                                     std::size_t from, std::size_t to) {
  std::vector<std::size_t> parent(g.nodes.size(), SIZE_MAX);
  std::vector<std::size_t> queue{from};
  parent[from] = from;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    std::size_t v = queue[head];
    if (v == to) break;
    for (auto [w, neg] : g.out[v]) {
      (void)neg;
      if (comp[w] == comp[from] && parent[w] == SIZE_MAX) {
        parent[w] = v;
        queue.push_back(w);
      }
    }
  }
  std::vector<std::size_t> path;
  for (std::size_t v = to;; v = parent[v]) {
    path.push_back(v);
    if (v == from) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

Program::Program(std::vector<Rule> rules) : rules_(std::move(rules)) {
  std::map<std::string, std::size_t> arity;
  auto note = [&](const Atom& a) {
    auto [it, inserted] = arity.try_emplace(a.predicate, a.args.size());
    if (!inserted && it->second != a.args.size()) {
      throw ArityError("predicate " + a.predicate + " used with arity " + std::to_string(it->second) + " and " +
                       std::to_string(a.args.size()));
    }
    for (const auto& t : a.args)
      if (!t.is_variable()) constants_.insert(t.name);
  };

  DependencyGraph graph;
  for (const auto& rule : rules_) {
    check_safety(rule);
    note(rule.head);
    head_predicates_.insert(rule.head.signature());
    const std::size_t h = graph.node(rule.head.signature());
    for (const auto& a : rule.pos_body) {
      note(a);
      body_predicates_.insert(a.signature());
      graph.out[graph.node(a.signature())].emplace_back(h, false);
    }
    for (const auto& a : rule.neg_body) {
      note(a);
      body_predicates_.insert(a.signature());
      graph.out[graph.node(a.signature())].emplace_back(h, true);
    }
  }

  std::size_t components = 0;
  const auto comp = strongly_connected(graph, components);
  for (std::size_t v = 0; v < graph.nodes.size(); ++v) {
    for (auto [w, neg] : graph.out[v]) {
      if (neg && comp[v] == comp[w]) {
        auto path = path_within(graph, comp, w, v);
        std::vector<std::string> cycle;
        for (auto p : path) cycle.push_back(to_string(graph.nodes[p]));
        cycle.push_back(to_string(graph.nodes[w]));
        throw StratificationError(std::move(cycle));
      }
    }
  }

  // Components come out of Tarjan in reverse topological order; process them
  // from sources to sinks, bumping the level across negative edges.
  std::vector<std::size_t> level(components, 0);
  std::vector<std::vector<std::size_t>> members(components);
  for (std::size_t v = 0; v < graph.nodes.size(); ++v) members[comp[v]].push_back(v);
  for (std::size_t c = components; c-- > 0;) {
    for (auto v : members[c]) {
      for (auto [w, neg] : graph.out[v]) {
        if (comp[w] == c) continue;
        level[comp[w]] = std::max(level[comp[w]], level[c] + (neg ? 1 : 0));
      }
    }
  }

  rule_strata_.reserve(rules_.size());
  for (const auto& rule : rules_) {
    const std::size_t s = level[comp[graph.index.at(rule.head.signature())]];
    rule_strata_.push_back(s);
    stratum_count_ = std::max(stratum_count_, s + 1);
  }
}

// ---------------------------------------------------------------------------
// FactSet

FactSet::FactSet(std::initializer_list<Atom> atoms) {
  for (const auto& a : atoms) insert(a);
}

void FactSet::insert(Atom atom) {
  if (!atom.is_ground()) throw std::invalid_argument("fact is not ground: " + to_string(atom));
  facts_.insert(std::move(atom));
}

std::set<std::string> FactSet::constants() const {
  std::set<std::string> out;
  for (const auto& f : facts_)
    for (const auto& t : f.args) out.insert(t.name);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Ident, LParen, RParen, Comma, Period, Implies, Not, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    const std::size_t line = line_, column = column_;
    if (pos_ >= src_.size()) return {Tok::End, "", line, column};
    const char c = src_[pos_];
    if (is_ident_char(c)) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
      std::string text(src_.substr(start, pos_ - start));
      if (text == "not" && pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        return {Tok::Not, text, line, column};
      }
      return {Tok::Ident, std::move(text), line, column};
    }
    advance();
    switch (c) {
      case '(':
        return {Tok::LParen, "(", line, column};
      case ')':
        return {Tok::RParen, ")", line, column};
      case ',':
        return {Tok::Comma, ",", line, column};
      case '.':
        return {Tok::Period, ".", line, column};
      case ':':
        if (pos_ < src_.size() && src_[pos_] == '-') {
          advance();
          return {Tok::Implies, ":-", line, column};
        }
        break;
      default:
        break;
    }
    throw ParseError(line, column, std::string("unexpected character '") + c + "'");
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { shift(); }

  std::vector<Rule> rules() {
    std::vector<Rule> out;
    while (tok_.kind != Tok::End) out.push_back(rule());
    return out;
  }

  Atom single_atom() {
    Atom a = atom();
    if (tok_.kind != Tok::End) fail("trailing input after atom");
    return a;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(tok_.line, tok_.column, msg); }

  void shift() { tok_ = lexer_.next(); }

  void expect(Tok kind, const char* what) {
    if (tok_.kind != kind) fail(std::string("expected ") + what + (tok_.text.empty() ? "" : ", found '" + tok_.text + "'"));
    shift();
  }

  Term term() {
    if (tok_.kind != Tok::Ident) fail("expected a term");
    Term t = starts_variable(tok_.text) ? Term::variable(tok_.text) : Term::constant(tok_.text);
    shift();
    return t;
  }

  Atom atom() {
    if (tok_.kind != Tok::Ident) fail("expected an atom");
    if (starts_variable(tok_.text)) fail("predicate names must start with a lowercase letter: '" + tok_.text + "'");
    Atom a(tok_.text);
    shift();
    if (tok_.kind == Tok::LParen) {
      shift();
      a.args.push_back(term());
      while (tok_.kind == Tok::Comma) {
        shift();
        a.args.push_back(term());
      }
      expect(Tok::RParen, "')'");
    }
    return a;
  }

  Rule rule() {
    Rule r;
    r.head = atom();
    if (tok_.kind == Tok::Implies) {
      shift();
      body_literal(r);
      while (tok_.kind == Tok::Comma) {
        shift();
        body_literal(r);
      }
    }
    expect(Tok::Period, "'.'");
    return r;
  }

  void body_literal(Rule& r) {
    if (tok_.kind == Tok::Not) {
      shift();
      r.neg_body.push_back(atom());
    } else {
      r.pos_body.push_back(atom());
    }
  }

  Lexer lexer_;
  Token tok_{Tok::End, "", 1, 1};
};

}  // namespace

Program parse_program(std::string_view source) { return Program(Parser(source).rules()); }

Atom parse_atom(std::string_view text) { return Parser(text).single_atom(); }

FactSet parse_facts(std::string_view source) {
  FactSet facts;
  for (auto& r : Parser(source).rules()) {
    if (!r.is_fact()) throw LogicError("expected only facts, found rule '" + to_string(r) + "'");
    facts.insert(std::move(r.head));
  }
  return facts;
}

// ---------------------------------------------------------------------------
// Printing

std::string to_string(const Term& term) { return term.name; }

std::string to_string(const Signature& sig) { return sig.name + "/" + std::to_string(sig.arity); }

std::string to_string(const Atom& atom) {
  std::string out = atom.predicate;
  if (!atom.args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      if (i) out += ',';
      out += atom.args[i].name;
    }
    out += ')';
  }
  return out;
}

std::string to_string(const Rule& rule) {
  std::string out = to_string(rule.head);
  if (!rule.is_fact()) {
    out += " :- ";
    bool first = true;
    for (const auto& a : rule.pos_body) {
      if (!first) out += ", ";
      out += to_string(a);
      first = false;
    }
    for (const auto& a : rule.neg_body) {
      if (!first) out += ", ";
      out += "not " + to_string(a);
      first = false;
    }
  }
  out += '.';
  return out;
}

std::string to_string(const Program& program) {
  std::string out;
  for (const auto& r : program.rules()) {
    out += to_string(r);
    out += '\n';
  }
  return out;
}

}  // namespace nesy::logic
