#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/method.hpp"
#include "synthlab/table.hpp"

namespace synthlab {

// Predicate over already-synthesized / unchanged variables: comparisons
// combined with and/or.
struct RuleCondition {
  enum class Kind { And, Or, Cmp };
  enum class Rel { Lt, Le, Gt, Ge, Eq, Ne };

  Kind kind = Kind::Cmp;
  std::shared_ptr<RuleCondition> lhs, rhs;
  std::string var;
  Rel rel = Rel::Eq;
  std::string value;

  void collect_vars(std::vector<std::string>& out) const {
    if (kind == Kind::Cmp) {
      out.push_back(var);
    } else {
      lhs->collect_vars(out);
      rhs->collect_vars(out);
    }
  }

  bool evaluate(const DataTable& t, std::size_t row) const {
    if (kind == Kind::And)
      return lhs->evaluate(t, row) && rhs->evaluate(t, row);
    if (kind == Kind::Or)
      return lhs->evaluate(t, row) || rhs->evaluate(t, row);
    const VariableDef& v = t.schema().var(var);
    const Cell& c = t.column(var)[row];
    if (c.is_missing()) {
      // a missing marker only matches an explicit missing-code comparison
      const std::string& code = v.missing_codes[static_cast<std::size_t>(c.missing_code)];
      if (rel == Rel::Eq) return value == code;
      if (rel == Rel::Ne) return value != code;
      return false;
    }
    if (v.kind == VarKind::Categorical) {
      const std::string& lev = v.levels[static_cast<std::size_t>(c.value)];
      switch (rel) {
        case Rel::Eq: return lev == value;
        case Rel::Ne: return lev != value;
        default:
          throw std::invalid_argument("ordering comparison on categorical " + var);
      }
    }
    double rhs_val = std::stod(value);
    switch (rel) {
      case Rel::Lt: return c.value < rhs_val;
      case Rel::Le: return c.value <= rhs_val;
      case Rel::Gt: return c.value > rhs_val;
      case Rel::Ge: return c.value >= rhs_val;
      case Rel::Eq: return c.value == rhs_val;
      case Rel::Ne: return c.value != rhs_val;
    }
    return false;
  }
};

struct Rule {
  std::shared_ptr<RuleCondition> condition;
  std::string target;
  std::string forced_value;
};

namespace detail {

struct CondParser {
  std::vector<std::string> toks;
  std::size_t pos = 0;

  static std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
      if (std::isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
        continue;
      }
      if (s[i] == '(' || s[i] == ')') {
        out.emplace_back(1, s[i]);
        ++i;
        continue;
      }
      if (s[i] == '\'' || s[i] == '"') {
        char q = s[i++];
        std::string tok;
        while (i < s.size() && s[i] != q) tok += s[i++];
        if (i == s.size()) throw std::invalid_argument("unterminated quote in rule");
        ++i;
        out.push_back(tok);
        continue;
      }
      static const char* ops[] = {"<=", ">=", "==", "!=", "<", ">", "="};
      bool matched = false;
      for (const char* op : ops) {
        std::size_t len = std::char_traits<char>::length(op);
        if (s.compare(i, len, op) == 0) {
          out.emplace_back(op);
          i += len;
          matched = true;
          break;
        }
      }
      if (matched) continue;
      std::string tok;
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) &&
             s[i] != '(' && s[i] != ')' && s[i] != '<' && s[i] != '>' &&
             s[i] != '=' && s[i] != '!')
        tok += s[i++];
      out.push_back(tok);
    }
    return out;
  }

  const std::string& peek() const {
    static const std::string empty;
    return pos < toks.size() ? toks[pos] : empty;
  }
  std::string next() {
    if (pos >= toks.size()) throw std::invalid_argument("unexpected end of rule condition");
    return toks[pos++];
  }

  std::shared_ptr<RuleCondition> parse_or() {
    auto node = parse_and();
    while (peek() == "or") {
      next();
      auto rhs = parse_and();
      auto parent = std::make_shared<RuleCondition>();
      parent->kind = RuleCondition::Kind::Or;
      parent->lhs = node;
      parent->rhs = rhs;
      node = parent;
    }
    return node;
  }

  std::shared_ptr<RuleCondition> parse_and() {
    auto node = parse_factor();
    while (peek() == "and") {
      next();
      auto rhs = parse_factor();
      auto parent = std::make_shared<RuleCondition>();
      parent->kind = RuleCondition::Kind::And;
      parent->lhs = node;
      parent->rhs = rhs;
      node = parent;
    }
    return node;
  }

  std::shared_ptr<RuleCondition> parse_factor() {
    if (peek() == "(") {
      next();
      auto node = parse_or();
      if (next() != ")") throw std::invalid_argument("expected ')' in rule condition");
      return node;
    }
    auto node = std::make_shared<RuleCondition>();
    node->kind = RuleCondition::Kind::Cmp;
    node->var = next();
    std::string op = next();
    if (op == "<") node->rel = RuleCondition::Rel::Lt;
    else if (op == "<=") node->rel = RuleCondition::Rel::Le;
    else if (op == ">") node->rel = RuleCondition::Rel::Gt;
    else if (op == ">=") node->rel = RuleCondition::Rel::Ge;
    else if (op == "==" || op == "=") node->rel = RuleCondition::Rel::Eq;
    else if (op == "!=") node->rel = RuleCondition::Rel::Ne;
    else throw std::invalid_argument("unknown comparison '" + op + "' in rule condition");
    node->value = next();
    return node;
  }
};

}  // namespace detail

inline std::shared_ptr<RuleCondition> parse_condition(const std::string& text) {
  detail::CondParser p;
  p.toks = detail::CondParser::tokenize(text);
  auto node = p.parse_or();
  if (p.pos != p.toks.size())
    throw std::invalid_argument("trailing tokens in rule condition: " + text);
  return node;
}

// "if <condition> then <var> = <value>"
inline Rule parse_rule(const std::string& text) {
  std::size_t if_pos = text.find("if ");
  std::size_t then_pos = text.find(" then ");
  if (if_pos == std::string::npos || then_pos == std::string::npos || if_pos > 0)
    throw std::invalid_argument("rule must have the form 'if <cond> then <var> = <value>': " + text);
  Rule r;
  r.condition = parse_condition(text.substr(3, then_pos - 3));
  std::string action = text.substr(then_pos + 6);
  std::size_t eq = action.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("rule action must be '<var> = <value>': " + text);
  auto trim = [](std::string s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  r.target = trim(action.substr(0, eq));
  r.forced_value = trim(action.substr(eq + 1));
  if (!r.forced_value.empty() &&
      (r.forced_value.front() == '\'' || r.forced_value.front() == '"') &&
      r.forced_value.size() >= 2 && r.forced_value.back() == r.forced_value.front())
    r.forced_value = r.forced_value.substr(1, r.forced_value.size() - 2);
  if (r.target.empty() || r.forced_value.empty())
    throw std::invalid_argument("incomplete rule action: " + text);
  return r;
}

struct SynthesisPlan {
  std::vector<std::string> visit_sequence;
  // absent entry: all earlier visit-sequence variables plus every
  // keep-unchanged / stratum / weight variable
  std::map<std::string, std::vector<std::string>> predictors;
  std::map<std::string, MethodSpec> methods;
  MethodSpec default_method;  // CART, per the synthesizer default
  std::vector<Rule> rules;
  bool proper = false;
  int M = 1;
  long k = -1;  // -1: match observed n
  std::uint64_t master_seed = 0;
  bool resample_unchanged = false;

  MethodSpec method_for(const std::string& var) const {
    auto it = methods.find(var);
    MethodSpec m = it != methods.end() ? it->second : default_method;
    m.proper = proper;
    return m;
  }

  std::vector<std::string> predictors_for(const std::string& var,
                                          const Schema& schema) const {
    auto it = predictors.find(var);
    if (it != predictors.end()) return it->second;
    std::vector<std::string> out;
    for (const auto& v : schema.variables())
      if (v.role != VarRole::Synthesize) out.push_back(v.name);
    for (const auto& name : visit_sequence) {
      if (name == var) break;
      out.push_back(name);
    }
    return out;
  }
};

}  // namespace synthlab
