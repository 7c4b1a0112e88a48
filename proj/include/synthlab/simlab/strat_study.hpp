#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "synthlab/combine.hpp"
#include "synthlab/rng.hpp"
#include "synthlab/simlab/report.hpp"
#include "synthlab/simlab/stratified.hpp"
#include "synthlab/stats.hpp"

namespace synthlab::simlab {

// Stratified population: H strata of size N_h each, stratum h (1-based) drawn
// from N(10h, h^2). Configurations 1-3 vary M and the per-stratum sample
// sizes.
struct StratSimConfig {
  int H = 10;
  long N_h = 1000;
  std::vector<long> n_h;  // per-stratum sample (and synthesis) sizes
  int M = 100;
  int n_sims = 1000;
  std::uint64_t seed = 0;

  static StratSimConfig configuration(int which, int n_sims,
                                      std::uint64_t seed) {
    StratSimConfig cfg;
    cfg.n_sims = n_sims;
    cfg.seed = seed;
    if (which == 1) {
      cfg.M = 100;
      cfg.n_h.assign(10, 20);
    } else if (which == 2) {
      cfg.M = 10;
      cfg.n_h.assign(10, 20);
    } else if (which == 3) {
      cfg.M = 10;
      cfg.n_h = {11, 13, 15, 17, 19, 21, 23, 25, 27, 29};
    } else {
      throw std::invalid_argument("configuration must be 1, 2 or 3");
    }
    return cfg;
  }
};

inline SimReport run_stratified_simulation(const StratSimConfig& cfg) {
  if (static_cast<int>(cfg.n_h.size()) != cfg.H)
    throw std::invalid_argument("n_h must have one entry per stratum");
  long n_total = std::accumulate(cfg.n_h.begin(), cfg.n_h.end(), 0L);

  RngStream pop_rng(derive_seed(cfg.seed, 0));
  std::vector<std::vector<double>> pop(static_cast<std::size_t>(cfg.H));
  double true_mean = 0.0;
  for (int h = 0; h < cfg.H; ++h) {
    auto& s = pop[static_cast<std::size_t>(h)];
    s.reserve(static_cast<std::size_t>(cfg.N_h));
    for (long i = 0; i < cfg.N_h; ++i)
      s.push_back(pop_rng.normal(10.0 * (h + 1), static_cast<double>(h + 1)));
    true_mean += mean_of(s) / cfg.H;
  }
  std::vector<double> strata_sizes(static_cast<std::size_t>(cfg.H),
                                   static_cast<double>(cfg.N_h));

  detail::Accumulator qbar_plug, qbar_prop;
  detail::Accumulator ts, tp_plug;
  detail::Accumulator tm, tm_adj, tm_pos, tsppd, tp_prop;
  long tm_negative = 0;
  detail::Accumulator srs_var, strat_var;  // design-effect bookkeeping

  for (int sim = 0; sim < cfg.n_sims; ++sim) {
    RngStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(sim) + 1));

    // stratified without-replacement sample
    std::vector<std::vector<double>> obs(static_cast<std::size_t>(cfg.H));
    std::vector<double> all;
    for (int h = 0; h < cfg.H; ++h) {
      const auto& stratum = pop[static_cast<std::size_t>(h)];
      std::vector<std::size_t> idx(stratum.size());
      std::iota(idx.begin(), idx.end(), 0u);
      long nh = cfg.n_h[static_cast<std::size_t>(h)];
      for (long i = 0; i < nh; ++i) {
        std::size_t j =
            i + rng.uniform_index(idx.size() - static_cast<std::size_t>(i));
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
        obs[static_cast<std::size_t>(h)].push_back(stratum[idx[static_cast<std::size_t>(i)]]);
        all.push_back(stratum[idx[static_cast<std::size_t>(i)]]);
      }
    }
    StratEstimate obs_est = stratified_mean(obs, strata_sizes);
    strat_var.add(obs_est.variance);
    srs_var.add(sample_variance(all) / static_cast<double>(n_total));

    // per-stratum normal fits
    std::vector<double> ybar(static_cast<std::size_t>(cfg.H)),
        s2(static_cast<std::size_t>(cfg.H));
    for (int h = 0; h < cfg.H; ++h) {
      ybar[static_cast<std::size_t>(h)] = mean_of(obs[static_cast<std::size_t>(h)]);
      s2[static_cast<std::size_t>(h)] = sample_variance(obs[static_cast<std::size_t>(h)]);
    }

    for (int arm = 0; arm < 2; ++arm) {  // 0: plug-in, 1: proper
      PerSynthesisEstimates per;
      per.M = cfg.M;
      per.k = n_total;
      per.n = n_total;
      for (int l = 0; l < cfg.M; ++l) {
        std::vector<std::vector<double>> synth(static_cast<std::size_t>(cfg.H));
        for (int h = 0; h < cfg.H; ++h) {
          long nh = cfg.n_h[static_cast<std::size_t>(h)];
          double mu = ybar[static_cast<std::size_t>(h)];
          double var = s2[static_cast<std::size_t>(h)];
          if (arm == 1) {
            // scaled inverse-chi-square then normal for the stratum mean
            var = var * static_cast<double>(nh - 1) / rng.chisq(static_cast<double>(nh - 1));
            mu = rng.normal(mu, std::sqrt(var / static_cast<double>(nh)));
          }
          double sd = std::sqrt(var);
          auto& s = synth[static_cast<std::size_t>(h)];
          s.reserve(static_cast<std::size_t>(nh));
          for (long i = 0; i < nh; ++i) s.push_back(rng.normal(mu, sd));
        }
        StratEstimate e = stratified_mean(synth, strata_sizes);
        per.q.push_back({e.estimate});
        per.v.push_back({e.variance});
      }
      PooledStats pooled = pool(per);
      double q = pooled.q_bar[0];
      double vb = pooled.v_bar[0];
      double b = (*pooled.b)[0];

      if (arm == 0) {
        qbar_plug.add(q);
        double t = var_Ts(vb, n_total, n_total, cfg.M);
        ts.add(t, detail::z_covers(q, t, true_mean));
        t = var_Tp(vb, b, n_total, n_total, cfg.M);
        tp_plug.add(t, detail::z_covers(q, t, true_mean));
      } else {
        qbar_prop.add(q);
        bool neg = false;
        double t_m = var_TM(vb, b, cfg.M, &neg);
        tm.add(t_m);
        if (neg) ++tm_negative;
        else tm_pos.add(t_m, detail::z_covers(q, t_m, true_mean));
        double t = var_TM_adjusted(vb, b, n_total, n_total, cfg.M);
        tm_adj.add(t, detail::z_covers(q, t, true_mean));
        t = var_TsPPD(vb, n_total, n_total, cfg.M);
        tsppd.add(t, detail::z_covers(q, t, true_mean));
        t = var_Tp(vb, b, n_total, n_total, cfg.M);
        tp_prop.add(t, detail::z_covers(q, t, true_mean));
      }
    }
  }

  SimReport report;
  TargetSummary plug;
  plug.name = "mean";
  plug.true_value = true_mean;
  plug.mean_qbar = qbar_plug.mean();
  plug.emp_variance = qbar_plug.variance();
  plug.estimators["T_s"] = ts.stats();
  plug.estimators["T_p"] = tp_plug.stats();
  report.plug_in.push_back(std::move(plug));

  TargetSummary prop;
  prop.name = "mean";
  prop.true_value = true_mean;
  prop.mean_qbar = qbar_prop.mean();
  prop.emp_variance = qbar_prop.variance();
  prop.negative_tm_fraction = static_cast<double>(tm_negative) / cfg.n_sims;
  prop.estimators["T_M"] = tm.stats();
  prop.estimators["T_M>0"] = tm_pos.stats();
  prop.estimators["T_M-adjusted"] = tm_adj.stats();
  prop.estimators["T_s(PPD)"] = tsppd.stats();
  prop.estimators["T_p"] = tp_prop.stats();
  report.proper.push_back(std::move(prop));

  report.notes.push_back(
      "srs_to_stratified_variance_ratio=" +
      std::to_string(srs_var.mean() / strat_var.mean()));
  return report;
}

// mean SRS-formula variance over mean stratified variance, recomputed the
// same way run_stratified_simulation tracks it
inline double srs_to_stratified_ratio(const SimReport& report) {
  for (const auto& note : report.notes) {
    const std::string key = "srs_to_stratified_variance_ratio=";
    if (note.rfind(key, 0) == 0) return std::stod(note.substr(key.size()));
  }
  throw std::invalid_argument("report lacks the design-effect note");
}

}  // namespace synthlab::simlab
