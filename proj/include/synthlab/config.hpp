#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/combine.hpp"
#include "synthlab/formula.hpp"
#include "synthlab/plan.hpp"
#include "synthlab/schema.hpp"
#include "synthlab/sdc.hpp"

namespace synthlab {

// Parsed configuration file: [section] headers with key = value lines.
// Sections map onto the commands; unknown sections or keys are rejected with
// the offending line number.
struct SimulateConfig {
  std::string study;  // srs | stratified | ratio | interaction
  int n_sims = 0;
  int configuration = 1;  // stratified presets
  int M = 0;              // 0: study default
  long n = 0;
  long k = 0;
  int n_reps = 0;
  int n_seeds = 0;
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::string data_path;
  std::vector<std::string> synthetic_paths;
  long observed_n = -1;

  Schema schema;
  bool has_schema = false;

  SynthesisPlan plan;
  std::string stratify;  // per-stratum synthesis when set

  SdcPolicy sdc;
  bool has_sdc = false;

  std::string formula;
  ModelKind model = ModelKind::Linear;
  Estimator estimator = Estimator::Ts;
  double ci_level = 0.95;
  double design_effect = 1.0;

  std::vector<std::string> compare_variables;
  double bin_width = 0.0;

  SimulateConfig simulate;
  bool has_simulate = false;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim_ws(s.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

inline bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw std::invalid_argument("line " + std::to_string(line) +
                              ": expected a boolean, got '" + v + "'");
}

inline VariableDef parse_var_line(const std::string& value, int line) {
  std::vector<std::string> toks = split_ws(value);
  if (toks.size() < 2)
    throw std::invalid_argument("line " + std::to_string(line) +
                                ": var needs '<name> <kind> [options]'");
  VariableDef v;
  v.name = toks[0];
  if (toks[1] == "continuous") v.kind = VarKind::Continuous;
  else if (toks[1] == "categorical") v.kind = VarKind::Categorical;
  else
    throw std::invalid_argument("line " + std::to_string(line) +
                                ": unknown kind '" + toks[1] + "'");
  for (std::size_t i = 2; i < toks.size(); ++i) {
    std::size_t eq = toks[i].find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(line) +
                                  ": bad var option '" + toks[i] + "'");
    std::string key = toks[i].substr(0, eq), val = toks[i].substr(eq + 1);
    if (key == "levels") v.levels = split_commas(val);
    else if (key == "missing") v.missing_codes = split_commas(val);
    else if (key == "role") {
      if (val == "synthesize") v.role = VarRole::Synthesize;
      else if (val == "keep") v.role = VarRole::KeepUnchanged;
      else if (val == "stratum") v.role = VarRole::Stratum;
      else if (val == "weight") v.role = VarRole::Weight;
      else
        throw std::invalid_argument("line " + std::to_string(line) +
                                    ": unknown role '" + val + "'");
    } else {
      throw std::invalid_argument("line " + std::to_string(line) +
                                  ": unknown var option '" + key + "'");
    }
  }
  return v;
}

inline MethodSpec parse_method_value(const std::string& value, int line) {
  MethodSpec m;
  std::vector<std::string> toks = split_ws(value);
  if (toks.empty())
    throw std::invalid_argument("line " + std::to_string(line) +
                                ": empty method");
  try {
    m.kind = method_kind_from_string(toks[0]);
  } catch (const std::exception& e) {
    throw std::invalid_argument("line " + std::to_string(line) + ": " +
                                e.what());
  }
  for (std::size_t i = 1; i < toks.size(); ++i) {
    if (toks[i] == "smooth") m.smoothing = true;
    else
      throw std::invalid_argument("line " + std::to_string(line) +
                                  ": unknown method option '" + toks[i] + "'");
  }
  return m;
}

inline TopcodeBounds parse_bounds(const std::string& value, int line) {
  std::size_t colon = value.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("line " + std::to_string(line) +
                                ": top-code bounds need '<lower>:<upper>', '-' to skip");
  TopcodeBounds b;
  std::string lo = trim_ws(value.substr(0, colon));
  std::string hi = trim_ws(value.substr(colon + 1));
  try {
    if (lo != "-") b.lower = std::stod(lo);
    if (hi != "-") b.upper = std::stod(hi);
  } catch (const std::exception&) {
    throw std::invalid_argument("line " + std::to_string(line) +
                                ": bad top-code bound");
  }
  return b;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in, const std::string& origin = "<config>") {
  RunConfig cfg;
  std::vector<VariableDef> vars;
  std::string section;
  std::string raw;
  int line = 0;

  static const std::set<std::string> sections{"data",    "schema",  "plan",
                                             "sdc",     "analysis", "compare",
                                             "simulate"};
  auto fail = [&](const std::string& msg) -> std::invalid_argument {
    return std::invalid_argument(origin + ":" + std::to_string(line) + ": " + msg);
  };

  while (std::getline(in, raw)) {
    ++line;
    std::string text = detail::trim_ws(raw);
    if (text.empty() || text[0] == '#') continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw fail("unterminated section header");
      section = text.substr(1, text.size() - 2);
      if (!sections.count(section)) throw fail("unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = text.find('=');
    if (eq == std::string::npos) throw fail("expected 'key = value'");
    std::string key = detail::trim_ws(text.substr(0, eq));
    std::string value = detail::trim_ws(text.substr(eq + 1));
    if (section.empty()) throw fail("key outside any section");
    if (key.empty() || value.empty()) throw fail("empty key or value");

    try {
      if (section == "data") {
        if (key == "path") cfg.data_path = value;
        else if (key == "synthetic") {
          for (const auto& p : detail::split_ws(value))
            cfg.synthetic_paths.push_back(p);
        } else if (key == "n") cfg.observed_n = std::stol(value);
        else throw fail("unknown key '" + key + "' in [data]");
      } else if (section == "schema") {
        if (key == "var") vars.push_back(detail::parse_var_line(value, line));
        else throw fail("unknown key '" + key + "' in [schema]");
      } else if (section == "plan") {
        if (key == "visit_sequence") cfg.plan.visit_sequence = detail::split_ws(value);
        else if (key.rfind("method.", 0) == 0)
          cfg.plan.methods[key.substr(7)] = detail::parse_method_value(value, line);
        else if (key.rfind("predictors.", 0) == 0)
          cfg.plan.predictors[key.substr(11)] = detail::split_ws(value);
        else if (key == "default_method")
          cfg.plan.default_method = detail::parse_method_value(value, line);
        else if (key == "rule") cfg.plan.rules.push_back(parse_rule(value));
        else if (key == "proper") cfg.plan.proper = detail::parse_bool(value, line);
        else if (key == "M") cfg.plan.M = std::stoi(value);
        else if (key == "k") cfg.plan.k = std::stol(value);
        else if (key == "seed") cfg.plan.master_seed = std::stoull(value);
        else if (key == "resample_unchanged")
          cfg.plan.resample_unchanged = detail::parse_bool(value, line);
        else if (key == "stratify") cfg.stratify = value;
        else throw fail("unknown key '" + key + "' in [plan]");
      } else if (section == "sdc") {
        cfg.has_sdc = true;
        if (key == "label") cfg.sdc.label_text = value;
        else if (key == "keys") cfg.sdc.key_variables = detail::split_ws(value);
        else if (key.rfind("topcode.", 0) == 0)
          cfg.sdc.topcode[key.substr(8)] = detail::parse_bounds(value, line);
        else throw fail("unknown key '" + key + "' in [sdc]");
      } else if (section == "analysis") {
        if (key == "formula") cfg.formula = value;
        else if (key == "model") {
          if (value == "linear") cfg.model = ModelKind::Linear;
          else if (value == "logistic") cfg.model = ModelKind::Logistic;
          else throw fail("unknown model '" + value + "'");
        } else if (key == "estimator") cfg.estimator = estimator_from_string(value);
        else if (key == "ci_level") cfg.ci_level = std::stod(value);
        else if (key == "design_effect") cfg.design_effect = std::stod(value);
        else throw fail("unknown key '" + key + "' in [analysis]");
      } else if (section == "compare") {
        if (key == "variables") cfg.compare_variables = detail::split_ws(value);
        else if (key == "bin_width") cfg.bin_width = std::stod(value);
        else if (key == "formula") cfg.formula = value;
        else if (key == "model") {
          if (value == "linear") cfg.model = ModelKind::Linear;
          else if (value == "logistic") cfg.model = ModelKind::Logistic;
          else throw fail("unknown model '" + value + "'");
        } else throw fail("unknown key '" + key + "' in [compare]");
      } else if (section == "simulate") {
        cfg.has_simulate = true;
        if (key == "study") cfg.simulate.study = value;
        else if (key == "n_sims") cfg.simulate.n_sims = std::stoi(value);
        else if (key == "configuration") cfg.simulate.configuration = std::stoi(value);
        else if (key == "M") cfg.simulate.M = std::stoi(value);
        else if (key == "n") cfg.simulate.n = std::stol(value);
        else if (key == "k") cfg.simulate.k = std::stol(value);
        else if (key == "n_reps") cfg.simulate.n_reps = std::stoi(value);
        else if (key == "n_seeds") cfg.simulate.n_seeds = std::stoi(value);
        else if (key == "seed") cfg.simulate.seed = std::stoull(value);
        else throw fail("unknown key '" + key + "' in [simulate]");
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  if (!vars.empty()) {
    cfg.schema = Schema(vars);
    cfg.has_schema = true;
  }
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  return parse_config(in, path);
}

}  // namespace synthlab
