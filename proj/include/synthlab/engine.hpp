#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/design.hpp"
#include "synthlab/fitgen.hpp"
#include "synthlab/plan.hpp"
#include "synthlab/rng.hpp"

namespace synthlab {

struct Manifest {
  std::vector<std::string> plan_echo;
  std::vector<std::uint64_t> replicate_seeds;
  std::vector<std::string> warnings;
  bool labelled = false;
  std::string label_text;

  std::string to_text() const {
    std::ostringstream out;
    if (labelled) out << "label: " << label_text << "\n";
    for (const auto& l : plan_echo) out << l << "\n";
    for (std::size_t i = 0; i < replicate_seeds.size(); ++i)
      out << "seed.replicate." << (i + 1) << ": " << replicate_seeds[i] << "\n";
    for (const auto& w : warnings) out << "warning: " << w << "\n";
    return out.str();
  }
};

struct SynthesisOutput {
  std::vector<DataTable> replicates;
  Manifest manifest;
};

namespace detail {

// Target encoding for one variable: class ids are compacted to the classes
// present in the fitting rows (absent levels are never generated).
struct TargetCodec {
  bool categorical = false;
  std::vector<int> present_to_encoded;  // compact id -> encoded level
  std::map<int, int> encoded_to_present;

  int n_classes() const { return static_cast<int>(present_to_encoded.size()); }
};

struct VariableFit {
  std::string name;
  std::vector<std::string> predictors;
  MethodSpec method;
  TargetCodec codec;
  FittedGenerator generator;
  // continuous variables with declared missing codes
  bool has_missing_model = false;
  bool missing_always_absent = false;  // no observed missing: indicator all 0
  FittedGenerator missing_generator;
};

inline std::vector<std::size_t> fitting_rows(const DataTable& table,
                                             const SynthesisPlan& plan,
                                             const std::string& var) {
  std::vector<std::size_t> rows;
  rows.reserve(table.n_rows());
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    bool excluded = false;
    for (const Rule& rule : plan.rules)
      if (rule.target == var && rule.condition->evaluate(table, r)) {
        excluded = true;
        break;
      }
    if (!excluded) rows.push_back(r);
  }
  return rows;
}

inline Cell parse_forced_value(const VariableDef& v, const std::string& text) {
  int mc = v.missing_code_index(text);
  if (mc >= 0) return Cell::missing(mc);
  if (v.kind == VarKind::Categorical) {
    int lev = v.level_index(text);
    if (lev < 0)
      throw std::invalid_argument("rule forces unknown level '" + text +
                                  "' for " + v.name);
    return Cell::of(lev);
  }
  return Cell::of(std::stod(text));
}

inline void validate_plan(const DataTable& table, const SynthesisPlan& plan) {
  const Schema& s = table.schema();
  std::set<std::string> synth_vars;
  for (const auto& v : s.variables())
    if (v.role == VarRole::Synthesize) synth_vars.insert(v.name);

  std::map<std::string, std::size_t> visit_pos;
  for (std::size_t i = 0; i < plan.visit_sequence.size(); ++i) {
    const std::string& name = plan.visit_sequence[i];
    if (!synth_vars.count(name))
      throw std::invalid_argument("visit sequence variable '" + name +
                                  "' is not a synthesize-role variable");
    if (visit_pos.count(name))
      throw std::invalid_argument("variable repeated in visit sequence: " + name);
    visit_pos[name] = i;
  }
  for (const auto& name : synth_vars)
    if (!visit_pos.count(name))
      throw std::invalid_argument("synthesize-role variable missing from visit sequence: " + name);

  std::size_t max_preds = 0;
  for (const auto& name : plan.visit_sequence) {
    auto preds = plan.predictors_for(name, s);
    max_preds = std::max(max_preds, preds.size());
    for (const auto& p : preds) {
      int pi = s.index_of(p);
      if (pi < 0) throw std::invalid_argument("unknown predictor: " + p);
      if (s.var(static_cast<std::size_t>(pi)).role == VarRole::Synthesize) {
        auto it = visit_pos.find(p);
        if (it == visit_pos.end() || it->second >= visit_pos.at(name))
          throw std::invalid_argument(
              "predictor matrix is not lower triangular: '" + p +
              "' is not earlier than '" + name + "'");
      }
    }
  }
  if (table.n_rows() < 2 * max_preds)
    throw std::invalid_argument("too few rows for the requested predictor counts");

  for (const Rule& rule : plan.rules) {
    auto tit = visit_pos.find(rule.target);
    if (tit == visit_pos.end())
      throw std::invalid_argument("rule targets non-synthesized variable: " + rule.target);
    std::vector<std::string> cond_vars;
    rule.condition->collect_vars(cond_vars);
    for (const auto& cv : cond_vars) {
      int ci = s.index_of(cv);
      if (ci < 0) throw std::invalid_argument("rule references unknown variable: " + cv);
      if (s.var(static_cast<std::size_t>(ci)).role == VarRole::Synthesize) {
        auto it = visit_pos.find(cv);
        if (it == visit_pos.end() || it->second >= tit->second)
          throw std::invalid_argument("rule condition references variable '" + cv +
                                      "' not strictly earlier than target '" +
                                      rule.target + "'");
      }
    }
    parse_forced_value(s.var(rule.target), rule.forced_value);
  }

  if (plan.M < 1) throw std::invalid_argument("M must be >= 1");
  long k = plan.k > 0 ? plan.k : static_cast<long>(table.n_rows());
  if (k != static_cast<long>(table.n_rows()) && !plan.resample_unchanged) {
    for (const auto& v : s.variables())
      if (v.role == VarRole::KeepUnchanged || v.role == VarRole::Weight)
        throw std::invalid_argument(
            "k differs from n while unchanged variables exist; set the "
            "resampling policy (resample_unchanged)");
  }
}

inline std::vector<double> continuous_values(const DataTable& t,
                                             const std::string& var,
                                             const std::vector<std::size_t>& rows) {
  std::vector<double> y;
  y.reserve(rows.size());
  const Column& col = t.column(var);
  for (std::size_t r : rows) y.push_back(col[r].value);
  return y;
}

inline VariableFit fit_variable(const DataTable& table, const SynthesisPlan& plan,
                                std::size_t visit_index, Manifest& manifest) {
  const Schema& s = table.schema();
  const std::string& name = plan.visit_sequence[visit_index];
  const VariableDef& v = s.var(name);

  VariableFit vf;
  vf.name = name;
  vf.predictors = plan.predictors_for(name, s);
  vf.method = plan.method_for(name);
  // parametric methods fit an intercept-only model without predictors; CART
  // has nothing to split on, so it degrades to marginal donor sampling
  if (vf.predictors.empty() && vf.method.kind == MethodKind::Cart)
    vf.method.kind = MethodKind::Empirical;

  std::vector<std::size_t> rows = fitting_rows(table, plan, name);
  if (rows.empty())
    throw std::invalid_argument("no fitting rows left for variable " + name);

  auto warn = [&](const std::string& msg) {
    manifest.warnings.push_back(name + ": " + msg);
  };

  if (v.kind == VarKind::Continuous && v.has_missing_codes()) {
    // missingness indicator first, then the values from the non-missing fit
    vf.has_missing_model = true;
    const Column& col = table.column(name);
    std::vector<std::size_t> nonmissing;
    std::vector<int> indicator;
    for (std::size_t r : rows) {
      bool miss = col[r].is_missing();
      indicator.push_back(miss ? 1 : 0);
      if (!miss) nonmissing.push_back(r);
    }
    if (nonmissing.empty())
      throw std::invalid_argument("all observed values missing for " + name);
    long n_miss = std::count(indicator.begin(), indicator.end(), 1);
    if (n_miss == 0) {
      vf.missing_always_absent = true;
    } else {
      DataTable fit_table = table.select_rows(rows);
      DesignMatrix dm = encode_design(fit_table, vf.predictors);
      MethodSpec ind_method = vf.method;
      ind_method.kind = vf.method.kind == MethodKind::Cart ? MethodKind::Cart
                                                           : MethodKind::Logit;
      ind_method.smoothing = false;
      if (vf.predictors.empty() && ind_method.kind == MethodKind::Cart)
        ind_method.kind = MethodKind::Empirical;
      vf.missing_generator = fit_generator(ind_method, {}, indicator, 2, dm);
      for (const auto& w : vf.missing_generator.warnings)
        warn("missingness indicator: " + w);
    }
    DataTable value_table = table.select_rows(nonmissing);
    DesignMatrix dmv = encode_design(value_table, vf.predictors);
    std::vector<double> y = continuous_values(table, name, nonmissing);
    if (vf.method.kind == MethodKind::Logit || vf.method.kind == MethodKind::Polyreg)
      throw std::invalid_argument("categorical method on continuous variable " + name);
    vf.generator = fit_generator(vf.method, y, {}, 0, dmv);
    for (const auto& w : vf.generator.warnings) warn(w);
    return vf;
  }

  DataTable fit_table = table.select_rows(rows);
  DesignMatrix dm = encode_design(fit_table, vf.predictors);

  if (v.kind == VarKind::Continuous) {
    if (vf.method.kind == MethodKind::Logit || vf.method.kind == MethodKind::Polyreg)
      throw std::invalid_argument("categorical method on continuous variable " + name);
    std::vector<double> y = continuous_values(table, name, rows);
    vf.generator = fit_generator(vf.method, y, {}, 0, dm);
    for (const auto& w : vf.generator.warnings) warn(w);
    return vf;
  }

  // categorical target under missing-as-category coding, compacted to the
  // classes actually present
  vf.codec.categorical = true;
  const Column& col = table.column(name);
  std::vector<int> encoded;
  encoded.reserve(rows.size());
  for (std::size_t r : rows) encoded.push_back(encoded_level(v, col[r]));
  std::set<int> present(encoded.begin(), encoded.end());
  for (int e : present) {
    vf.codec.encoded_to_present[e] = vf.codec.n_classes();
    vf.codec.present_to_encoded.push_back(e);
  }
  std::vector<int> y;
  y.reserve(encoded.size());
  for (int e : encoded) y.push_back(vf.codec.encoded_to_present.at(e));

  if (vf.method.kind == MethodKind::Norm || vf.method.kind == MethodKind::Normrank)
    throw std::invalid_argument("continuous method on categorical variable " + name);
  if (vf.method.kind == MethodKind::Logit && vf.codec.n_classes() != 2) {
    if (vf.codec.n_classes() > 2) {
      warn("logit requested but target has >2 present levels; using polyreg");
      vf.method.kind = MethodKind::Polyreg;
    }
  }
  if (vf.codec.n_classes() < 2 &&
      (vf.method.kind == MethodKind::Logit || vf.method.kind == MethodKind::Polyreg)) {
    warn("constant categorical target; using empirical sampling");
    vf.method.kind = MethodKind::Empirical;
  }
  vf.method.smoothing = false;
  vf.generator = fit_generator(vf.method, {}, y, vf.codec.n_classes(), dm);
  for (const auto& w : vf.generator.warnings) warn(w);
  return vf;
}

inline void generate_variable(const VariableFit& vf, DataTable& synth,
                              const SynthesisPlan& plan, RngStream& rng) {
  const Schema& s = synth.schema();
  const VariableDef& v = s.var(vf.name);
  const std::size_t k = synth.n_rows();
  Column& out = synth.column(vf.name);

  FittedGenerator gen = vf.generator;
  if (plan.proper) gen = draw_posterior(gen, rng);

  DesignMatrix xnew = encode_design(synth, vf.predictors);

  if (vf.has_missing_model) {
    std::vector<int> indicator(k, 0);
    if (!vf.missing_always_absent) {
      FittedGenerator mgen = vf.missing_generator;
      if (plan.proper) mgen = draw_posterior(mgen, rng);
      indicator = generate_classes(mgen, xnew, rng);
    }
    std::vector<double> values = generate_continuous(gen, xnew, rng);
    for (std::size_t r = 0; r < k; ++r)
      out[r] = indicator[r] ? Cell::missing(0) : Cell::of(values[r]);
  } else if (v.kind == VarKind::Continuous) {
    std::vector<double> values = generate_continuous(gen, xnew, rng);
    for (std::size_t r = 0; r < k; ++r) out[r] = Cell::of(values[r]);
  } else {
    std::vector<int> classes = generate_classes(gen, xnew, rng);
    for (std::size_t r = 0; r < k; ++r) {
      int enc = vf.codec.present_to_encoded[static_cast<std::size_t>(classes[r])];
      out[r] = enc == static_cast<int>(v.levels.size()) ? Cell::missing(0)
                                                        : Cell::of(enc);
    }
  }

  // constraint rules overwrite the target where their condition holds
  for (const Rule& rule : plan.rules) {
    if (rule.target != vf.name) continue;
    Cell forced = parse_forced_value(v, rule.forced_value);
    for (std::size_t r = 0; r < k; ++r)
      if (rule.condition->evaluate(synth, r)) out[r] = forced;
  }
}

}  // namespace detail

inline SynthesisOutput synthesize(const DataTable& table, const SynthesisPlan& plan) {
  detail::validate_plan(table, plan);
  const Schema& s = table.schema();
  const std::size_t n = table.n_rows();
  const auto k = static_cast<std::size_t>(plan.k > 0 ? plan.k
                                                     : static_cast<long>(n));

  SynthesisOutput out;
  Manifest& mf = out.manifest;
  mf.plan_echo.push_back("proper: " + std::string(plan.proper ? "true" : "false"));
  mf.plan_echo.push_back("M: " + std::to_string(plan.M));
  mf.plan_echo.push_back("k: " + std::to_string(k));
  mf.plan_echo.push_back("seed: " + std::to_string(plan.master_seed));
  {
    std::string seq = "visit_sequence:";
    for (const auto& v : plan.visit_sequence) seq += " " + v;
    mf.plan_echo.push_back(seq);
  }
  for (const auto& v : plan.visit_sequence)
    mf.plan_echo.push_back("method." + v + ": " +
                           to_string(plan.method_for(v).kind) +
                           (plan.proper ? " (posterior draw)" : " (plug-in)"));

  // fits are replicate-independent; posterior draws happen per replicate
  std::vector<detail::VariableFit> fits;
  for (std::size_t j = 0; j < plan.visit_sequence.size(); ++j)
    fits.push_back(detail::fit_variable(table, plan, j, mf));

  for (int l = 0; l < plan.M; ++l) {
    std::uint64_t seed_l = derive_seed(plan.master_seed, static_cast<std::uint64_t>(l) + 1);
    mf.replicate_seeds.push_back(seed_l);

    DataTable synth(s, k);
    // unchanged variables: copied when k = n, otherwise row-resampled
    {
      RngStream xrng(derive_seed(seed_l, 0));
      std::vector<std::size_t> src(k);
      for (std::size_t r = 0; r < k; ++r)
        src[r] = (k == n) ? r : xrng.uniform_index(n);
      for (std::size_t c = 0; c < s.size(); ++c) {
        if (s.var(c).role == VarRole::Synthesize) continue;
        for (std::size_t r = 0; r < k; ++r)
          synth.column(c)[r] = table.at(src[r], c);
      }
    }

    for (std::size_t j = 0; j < fits.size(); ++j) {
      RngStream rng(derive_seed(seed_l, j + 1));
      detail::generate_variable(fits[j], synth, plan, rng);
    }

    // re-validate against the schema
    std::vector<Column> cols;
    for (std::size_t c = 0; c < s.size(); ++c) cols.push_back(synth.column(c));
    out.replicates.emplace_back(s, std::move(cols));
  }
  return out;
}

// Plan executed independently within each stratum; outputs concatenated with
// the stratum column preserved.
inline SynthesisOutput synthesize_stratified(
    const DataTable& table, const SynthesisPlan& plan,
    const std::string& stratum_var,
    const std::map<std::string, long>& k_per_stratum = {}) {
  const Schema& s = table.schema();
  const VariableDef& sv = s.var(stratum_var);
  if (sv.role != VarRole::Stratum)
    throw std::invalid_argument(stratum_var + " does not have the stratum role");
  if (sv.kind != VarKind::Categorical)
    throw std::invalid_argument("stratum variable must be categorical");

  for (const auto& [name, kh] : k_per_stratum) {
    if (sv.level_index(name) < 0)
      throw std::invalid_argument("synthetic size given for unknown stratum: " + name);
    if (kh < 1) throw std::invalid_argument("stratum size must be positive");
  }

  std::vector<std::vector<std::size_t>> stratum_rows(sv.levels.size());
  const Column& col = table.column(stratum_var);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (col[r].is_missing())
      throw std::invalid_argument("missing stratum value at row " + std::to_string(r + 1));
    stratum_rows[static_cast<std::size_t>(col[r].value)].push_back(r);
  }

  int min_leaf = plan.default_method.cart.min_leaf_size;
  for (const auto& [name, m] : plan.methods)
    if (m.kind == MethodKind::Cart)
      min_leaf = std::max(min_leaf, m.cart.min_leaf_size);

  SynthesisOutput out;
  out.replicates.assign(static_cast<std::size_t>(plan.M), DataTable());
  std::vector<std::vector<DataTable>> per_stratum(sv.levels.size());

  for (std::size_t h = 0; h < sv.levels.size(); ++h) {
    if (stratum_rows[h].empty())
      throw std::invalid_argument("empty stratum: " + sv.levels[h]);
    if (stratum_rows[h].size() < 2 * static_cast<std::size_t>(min_leaf))
      throw std::invalid_argument("stratum too small: " + sv.levels[h]);
    DataTable sub = table.select_rows(stratum_rows[h]);
    SynthesisPlan sub_plan = plan;
    sub_plan.master_seed = derive_seed(plan.master_seed, 0x5354524154ULL + h);
    auto it = k_per_stratum.find(sv.levels[h]);
    sub_plan.k = it != k_per_stratum.end() ? it->second
                                           : static_cast<long>(sub.n_rows());
    SynthesisOutput so = synthesize(sub, sub_plan);
    per_stratum[h] = std::move(so.replicates);
    for (const auto& w : so.manifest.warnings)
      out.manifest.warnings.push_back("stratum " + sv.levels[h] + ": " + w);
    if (h == 0) {
      out.manifest.plan_echo = so.manifest.plan_echo;
      out.manifest.replicate_seeds = so.manifest.replicate_seeds;
    }
  }

  for (int l = 0; l < plan.M; ++l) {
    std::size_t total = 0;
    for (std::size_t h = 0; h < per_stratum.size(); ++h)
      total += per_stratum[h][static_cast<std::size_t>(l)].n_rows();
    std::vector<Column> cols(s.size());
    for (auto& c : cols) c.reserve(total);
    for (std::size_t h = 0; h < per_stratum.size(); ++h) {
      const DataTable& part = per_stratum[h][static_cast<std::size_t>(l)];
      for (std::size_t c = 0; c < s.size(); ++c)
        cols[c].insert(cols[c].end(), part.column(c).begin(), part.column(c).end());
    }
    out.replicates[static_cast<std::size_t>(l)] = DataTable(s, std::move(cols));
  }
  return out;
}

}  // namespace synthlab
