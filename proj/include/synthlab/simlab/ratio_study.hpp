#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "synthlab/analyze.hpp"
#include "synthlab/combine.hpp"
#include "synthlab/engine.hpp"
#include "synthlab/simlab/report.hpp"

namespace synthlab::simlab {

// Stand-in for the confidential survey extract: a health indicator modelled
// by logistic regression on age, sex and marital status. The synthesis
// models match the generating process, so the ASD assumption holds and the
// expected SE ratios depend only on (M, k/n).
struct RatioStudyConfig {
  long n = 20000;
  int M = 10;
  int n_reps = 200;
  std::uint64_t seed = 0;
};

struct RatioRow {
  std::string coefficient;
  double ts = 0.0;     // mean sqrt(T_s)/SE_obs
  double tsppd = 0.0;  // mean sqrt(T_s(PPD))/SE_obs
  double tp = 0.0;
  double tm = 0.0;       // over non-negative cells only
  long tm_na_count = 0;  // negative T_M cells, reported as NA
  long n_reps = 0;
};

struct RatioReport {
  std::vector<RatioRow> rows;
  double grand_mean_ts = 0.0;
  double grand_mean_tsppd = 0.0;
  long tm_na_total = 0;
};

namespace detail {

inline DataTable make_survey_table(long n, RngStream& rng) {
  Schema schema({VariableDef{"age", VarKind::Continuous, {}, {}, VarRole::Synthesize},
                 VariableDef{"sex", VarKind::Categorical, {"m", "f"}, {}, VarRole::Synthesize},
                 VariableDef{"mstat", VarKind::Categorical,
                             {"single", "married", "widowed", "divorced"}, {},
                             VarRole::Synthesize},
                 VariableDef{"ill", VarKind::Categorical, {"no", "yes"}, {},
                             VarRole::Synthesize}});
  std::vector<Column> cols(4);
  auto logistic = [](double eta) { return 1.0 / (1.0 + std::exp(-eta)); };
  for (long i = 0; i < n; ++i) {
    double age = rng.normal();
    double sex = rng.uniform() < logistic(0.3 * age) ? 1.0 : 0.0;
    double e_married = std::exp(-0.2 + 0.5 * age + 0.3 * sex);
    double e_widowed = std::exp(-1.0 + 0.8 * age);
    double e_divorced = std::exp(-1.2 + 0.3 * age + 0.2 * sex);
    std::size_t mstat = rng.categorical({1.0, e_married, e_widowed, e_divorced});
    double eta = -0.5 + 0.4 * age + 0.3 * sex;
    if (mstat == 1) eta += 0.3;
    if (mstat == 2) eta += 0.6;
    if (mstat == 3) eta += 0.2;
    double ill = rng.uniform() < logistic(eta) ? 1.0 : 0.0;
    cols[0].push_back(Cell::of(age));
    cols[1].push_back(Cell::of(sex));
    cols[2].push_back(Cell::of(static_cast<double>(mstat)));
    cols[3].push_back(Cell::of(ill));
  }
  return DataTable(schema, std::move(cols));
}

}  // namespace detail

inline RatioReport run_ratio_study(const RatioStudyConfig& cfg) {
  AnalysisSpec spec =
      parse_formula("ill == yes ~ age + sex + mstat", ModelKind::Logistic);

  std::vector<detail::Accumulator> acc_ts, acc_tsppd, acc_tp, acc_tm;
  std::vector<long> na_counts;
  std::vector<std::string> names;

  for (int rep = 0; rep < cfg.n_reps; ++rep) {
    RngStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(rep) + 1));
    DataTable observed = detail::make_survey_table(cfg.n, rng);
    ModelFit obs_fit = fit_model(observed, spec);
    if (names.empty()) {
      names = obs_fit.names;
      acc_ts.resize(names.size());
      acc_tsppd.resize(names.size());
      acc_tp.resize(names.size());
      acc_tm.resize(names.size());
      na_counts.assign(names.size(), 0);
    }

    SynthesisPlan plan;
    plan.visit_sequence = {"age", "sex", "mstat", "ill"};
    plan.methods["age"] = {MethodKind::Norm};
    plan.methods["sex"] = {MethodKind::Logit};
    plan.methods["mstat"] = {MethodKind::Polyreg};
    plan.methods["ill"] = {MethodKind::Logit};
    plan.M = cfg.M;
    plan.master_seed = derive_seed(cfg.seed, 0x524154494fULL + rep);
    SynthesisOutput synth = synthesize(observed, plan);

    PerSynthesisEstimates per;
    per.M = cfg.M;
    per.k = cfg.n;
    per.n = cfg.n;
    for (const DataTable& r : synth.replicates) {
      ModelFit f = fit_model(r, spec);
      per.q.push_back(f.coef);
      per.v.push_back(f.var);
    }
    PooledStats pooled = pool(per);

    for (std::size_t j = 0; j < names.size(); ++j) {
      double se_obs = std::sqrt(obs_fit.var[j]);
      double vb = pooled.v_bar[j];
      double b = (*pooled.b)[j];
      acc_ts[j].add(std::sqrt(var_Ts(vb, cfg.n, cfg.n, cfg.M)) / se_obs);
      acc_tsppd[j].add(std::sqrt(var_TsPPD(vb, cfg.n, cfg.n, cfg.M)) / se_obs);
      acc_tp[j].add(std::sqrt(var_Tp(vb, b, cfg.n, cfg.n, cfg.M)) / se_obs);
      bool neg = false;
      double t_m = var_TM(vb, b, cfg.M, &neg);
      if (neg) ++na_counts[j];
      else acc_tm[j].add(std::sqrt(t_m) / se_obs);
    }
  }

  RatioReport out;
  for (std::size_t j = 0; j < names.size(); ++j) {
    RatioRow row;
    row.coefficient = names[j];
    row.ts = acc_ts[j].mean();
    row.tsppd = acc_tsppd[j].mean();
    row.tp = acc_tp[j].mean();
    row.tm = acc_tm[j].mean();
    row.tm_na_count = na_counts[j];
    row.n_reps = cfg.n_reps;
    out.grand_mean_ts += row.ts / static_cast<double>(names.size());
    out.grand_mean_tsppd += row.tsppd / static_cast<double>(names.size());
    out.tm_na_total += row.tm_na_count;
    out.rows.push_back(std::move(row));
  }
  return out;
}

// Interaction-shrinkage check: data generated without an interaction, a
// main-effects-only parametric synthesis, and an analysis model that includes
// the interaction. The synthetic pooled coefficient should sit closer to 0
// than the observed one in most runs.
struct InteractionStudyResult {
  int n_seeds = 0;
  int shrunk = 0;
  double shrinkage_rate = 0.0;
};

inline InteractionStudyResult run_interaction_study(int n_seeds,
                                                    std::uint64_t seed,
                                                    long n = 1000, int M = 40) {
  Schema schema({VariableDef{"x1", VarKind::Continuous, {}, {}, VarRole::Synthesize},
                 VariableDef{"x2", VarKind::Continuous, {}, {}, VarRole::Synthesize},
                 VariableDef{"y", VarKind::Continuous, {}, {}, VarRole::Synthesize}});
  AnalysisSpec spec = parse_formula("y ~ x1 + x2 + x1:x2");

  InteractionStudyResult out;
  out.n_seeds = n_seeds;
  for (int s = 0; s < n_seeds; ++s) {
    RngStream rng(derive_seed(seed, static_cast<std::uint64_t>(s) + 1));
    std::vector<Column> cols(3);
    for (long i = 0; i < n; ++i) {
      double x1 = rng.normal();
      double x2 = rng.normal(0.5 * x1, 1.0);
      double y = 1.0 + x1 + 0.5 * x2 + rng.normal();
      cols[0].push_back(Cell::of(x1));
      cols[1].push_back(Cell::of(x2));
      cols[2].push_back(Cell::of(y));
    }
    DataTable observed(schema, std::move(cols));

    SynthesisPlan plan;
    plan.visit_sequence = {"x1", "x2", "y"};
    plan.methods["x1"] = {MethodKind::Empirical};
    plan.methods["x2"] = {MethodKind::Norm};
    plan.methods["y"] = {MethodKind::Norm};
    plan.M = M;
    plan.master_seed = derive_seed(seed, 0x494e54ULL + s);
    SynthesisOutput synth = synthesize(observed, plan);

    ModelFit obs_fit = fit_model(observed, spec);
    double q_bar = 0.0;
    const std::size_t j = obs_fit.names.size() - 1;  // the x1:x2 coefficient
    for (const DataTable& rep : synth.replicates)
      q_bar += fit_model(rep, spec).coef[j] / M;
    if (std::fabs(q_bar) < std::fabs(obs_fit.coef[j])) ++out.shrunk;
  }
  out.shrinkage_rate = static_cast<double>(out.shrunk) / n_seeds;
  return out;
}

}  // namespace synthlab::simlab
