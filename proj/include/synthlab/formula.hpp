#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/design.hpp"
#include "synthlab/table.hpp"

namespace synthlab {

enum class ModelKind { Linear, Logistic };

// "y ~ a + b + a:b"; "a*b" expands to "a + b + a:b". A logistic response may
// be written "var == level" to binarize a categorical.
struct AnalysisSpec {
  ModelKind kind = ModelKind::Linear;
  std::string response;
  std::string response_level;  // logistic binarization, empty if none
  std::vector<std::vector<std::string>> terms;  // each term: interacting vars

  std::vector<std::string> variables_used() const {
    std::vector<std::string> out{response};
    for (const auto& t : terms)
      for (const auto& v : t)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
  }
};

namespace detail {

inline std::string trim_ws(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim_ws(s.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

}  // namespace detail

inline AnalysisSpec parse_formula(const std::string& text,
                                  ModelKind kind = ModelKind::Linear) {
  std::size_t tilde = text.find('~');
  if (tilde == std::string::npos)
    throw std::invalid_argument("formula must contain '~': " + text);
  AnalysisSpec spec;
  spec.kind = kind;
  std::string lhs = detail::trim_ws(text.substr(0, tilde));
  std::size_t eq = lhs.find("==");
  if (eq != std::string::npos) {
    spec.response = detail::trim_ws(lhs.substr(0, eq));
    spec.response_level = detail::trim_ws(lhs.substr(eq + 2));
    if (!spec.response_level.empty() &&
        (spec.response_level.front() == '\'' || spec.response_level.front() == '"'))
      spec.response_level =
          spec.response_level.substr(1, spec.response_level.size() - 2);
    if (kind != ModelKind::Logistic)
      throw std::invalid_argument("binarized response requires a logistic model");
  } else {
    spec.response = lhs;
  }
  if (spec.response.empty())
    throw std::invalid_argument("empty response in formula: " + text);

  for (const std::string& raw : detail::split_on(text.substr(tilde + 1), '+')) {
    if (raw.empty())
      throw std::invalid_argument("empty term in formula: " + text);
    if (raw.find('*') != std::string::npos) {
      std::vector<std::string> f = detail::split_on(raw, '*');
      if (f.size() != 2 || f[0].empty() || f[1].empty())
        throw std::invalid_argument("bad '*' term: " + raw);
      spec.terms.push_back({f[0]});
      spec.terms.push_back({f[1]});
      spec.terms.push_back({f[0], f[1]});
    } else {
      std::vector<std::string> f = detail::split_on(raw, ':');
      for (const auto& v : f)
        if (v.empty()) throw std::invalid_argument("bad ':' term: " + raw);
      spec.terms.push_back(f);
    }
  }
  if (spec.terms.empty())
    throw std::invalid_argument("formula has no predictors: " + text);
  return spec;
}

// Complete-case analysis design: intercept, main effects, and products for
// interaction terms. Categorical variables contribute dummies against level 0.
struct AnalysisDesign {
  Eigen::MatrixXd X;
  std::vector<double> y;  // linear: values; logistic: 0/1
  std::vector<std::string> names;
};

inline AnalysisDesign build_analysis_design(const DataTable& table,
                                            const AnalysisSpec& spec) {
  const Schema& s = table.schema();
  for (const auto& v : spec.variables_used())
    if (s.index_of(v) < 0)
      throw std::invalid_argument("formula references unknown variable: " + v);

  const VariableDef& rv = s.var(spec.response);
  if (spec.kind == ModelKind::Linear && rv.kind != VarKind::Continuous)
    throw std::invalid_argument("linear model needs a continuous response");
  int resp_level = -1;
  if (spec.kind == ModelKind::Logistic) {
    if (rv.kind != VarKind::Categorical)
      throw std::invalid_argument("logistic model needs a categorical response");
    if (!spec.response_level.empty()) {
      resp_level = rv.level_index(spec.response_level);
      if (resp_level < 0)
        throw std::invalid_argument("unknown response level: " + spec.response_level);
    } else {
      if (rv.levels.size() != 2)
        throw std::invalid_argument(
            "logistic response with >2 levels needs 'var == level'");
      resp_level = 1;
    }
  }

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    bool complete = true;
    for (const auto& v : spec.variables_used())
      if (table.column(v)[r].is_missing()) complete = false;
    if (complete) rows.push_back(r);
  }
  if (rows.size() < 2)
    throw std::invalid_argument("too few complete cases to fit the model");

  // per-variable expansion: list of (column name suffix, row evaluator)
  struct Piece {
    std::string name;
    const Column* col;
    bool categorical;
    int level;
  };
  auto expand = [&](const std::string& var) {
    std::vector<Piece> out;
    const VariableDef& v = s.var(var);
    const Column& c = table.column(var);
    if (v.kind == VarKind::Continuous) {
      out.push_back({var, &c, false, -1});
    } else {
      for (std::size_t l = 1; l < v.levels.size(); ++l)
        out.push_back({var + "=" + v.levels[l], &c, true, static_cast<int>(l)});
    }
    return out;
  };
  auto piece_value = [&](const Piece& p, std::size_t r) {
    const Cell& c = (*p.col)[r];
    return p.categorical ? (c.value == p.level ? 1.0 : 0.0) : c.value;
  };

  AnalysisDesign out;
  out.names.push_back("(intercept)");
  std::vector<std::vector<Piece>> term_pieces;  // flattened column specs
  for (const auto& term : spec.terms) {
    std::vector<std::vector<Piece>> combos{{}};
    for (const auto& var : term) {
      std::vector<std::vector<Piece>> next;
      for (const auto& base : combos)
        for (const Piece& p : expand(var)) {
          auto ext = base;
          ext.push_back(p);
          next.push_back(std::move(ext));
        }
      combos = std::move(next);
    }
    for (auto& combo : combos) {
      std::string name;
      for (const Piece& p : combo) name += (name.empty() ? "" : ":") + p.name;
      out.names.push_back(name);
      term_pieces.push_back(std::move(combo));
    }
  }

  const auto nr = static_cast<Eigen::Index>(rows.size());
  out.X.resize(nr, static_cast<Eigen::Index>(out.names.size()));
  out.X.col(0).setOnes();
  for (std::size_t j = 0; j < term_pieces.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double v = 1.0;
      for (const Piece& p : term_pieces[j]) v *= piece_value(p, rows[i]);
      out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = v;
    }

  const Column& rc = table.column(spec.response);
  out.y.reserve(rows.size());
  for (std::size_t r : rows)
    out.y.push_back(spec.kind == ModelKind::Linear
                        ? rc[r].value
                        : (rc[r].value == resp_level ? 1.0 : 0.0));
  return out;
}

}  // namespace synthlab
