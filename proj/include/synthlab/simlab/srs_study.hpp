#pragma once

#include <Eigen/Dense>
#include <numeric>
#include <string>
#include <vector>

#include "synthlab/combine.hpp"
#include "synthlab/rng.hpp"
#include "synthlab/simlab/mvn.hpp"
#include "synthlab/simlab/report.hpp"

namespace synthlab::simlab {

struct SrsSimConfig {
  long N = 50000;
  long n = 500;
  long k = 1000;
  int M = 5;
  int n_sims = 10000;
  double rho = 0.5;
  int dim = 5;
  std::uint64_t seed = 0;
};

namespace detail {

struct OlsResult {
  std::vector<double> q, v;
};

// y = first column regressed on intercept + remaining columns
inline OlsResult regress_first_on_rest(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  Eigen::MatrixXd x(n, d);
  x.col(0).setOnes();
  x.rightCols(d - 1) = data.rightCols(d - 1);
  Eigen::VectorXd y = data.col(0);
  Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::MatrixXd xtx_inv = xtx.llt().solve(Eigen::MatrixXd::Identity(d, d));
  Eigen::VectorXd beta = xtx_inv * (x.transpose() * y);
  double rss = (y - x * beta).squaredNorm();
  double sigma2 = rss / static_cast<double>(n - d);
  OlsResult out;
  for (Eigen::Index j = 0; j < d; ++j) {
    out.q.push_back(beta(j));
    out.v.push_back(sigma2 * xtx_inv(j, j));
  }
  return out;
}

// without-replacement sample of `n` rows via partial Fisher-Yates
inline Eigen::MatrixXd sample_rows(const Eigen::MatrixXd& pop, long n,
                                   RngStream& rng) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(pop.rows()));
  std::iota(idx.begin(), idx.end(), 0u);
  for (long i = 0; i < n; ++i) {
    std::size_t j = i + rng.uniform_index(idx.size() - static_cast<std::size_t>(i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  Eigen::MatrixXd out(n, pop.cols());
  for (long i = 0; i < n; ++i)
    out.row(i) = pop.row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]));
  return out;
}

}  // namespace detail

inline SimReport run_srs_simulation(const SrsSimConfig& cfg) {
  const int d = cfg.dim;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(d, d, cfg.rho);
  sigma.diagonal().setOnes();
  Eigen::MatrixXd sigma_l = sigma.llt().matrixL();

  RngStream pop_rng(derive_seed(cfg.seed, 0));
  Eigen::MatrixXd pop =
      mvn_sample(Eigen::VectorXd::Zero(d), sigma_l, cfg.N, pop_rng);
  detail::OlsResult truth = detail::regress_first_on_rest(pop);

  const auto p = static_cast<std::size_t>(d);
  // per-coefficient accumulators
  std::vector<detail::Accumulator> qbar_plug(p), qbar_prop(p);
  std::vector<detail::Accumulator> ts(p), tp_plug(p);
  std::vector<detail::Accumulator> tm(p), tm_adj(p), tm_pos(p), tsppd(p),
      tp_prop(p);
  std::vector<long> tm_negative(p, 0);

  for (int sim = 0; sim < cfg.n_sims; ++sim) {
    RngStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(sim) + 1));
    Eigen::MatrixXd obs = detail::sample_rows(pop, cfg.n, rng);
    MvnFit fit = fit_mvn(obs);
    Eigen::MatrixXd fit_l = fit.cov.llt().matrixL();

    for (int arm = 0; arm < 2; ++arm) {  // 0: plug-in, 1: proper (PPD)
      PerSynthesisEstimates per;
      per.M = cfg.M;
      per.k = cfg.k;
      per.n = cfg.n;
      for (int l = 0; l < cfg.M; ++l) {
        Eigen::MatrixXd synth;
        if (arm == 0) {
          synth = mvn_sample(fit.mean, fit_l, cfg.k, rng);
        } else {
          MvnParams draw = mvn_posterior_draw(fit, rng);
          synth = mvn_sample(draw.mean, draw.cov.llt().matrixL(), cfg.k, rng);
        }
        detail::OlsResult r = detail::regress_first_on_rest(synth);
        per.q.push_back(std::move(r.q));
        per.v.push_back(std::move(r.v));
      }
      PooledStats pooled = pool(per);

      for (std::size_t j = 0; j < p; ++j) {
        double q = pooled.q_bar[j];
        double vb = pooled.v_bar[j];
        double b = (*pooled.b)[j];
        double tr = truth.q[j];
        if (arm == 0) {
          qbar_plug[j].add(q);
          double t = var_Ts(vb, cfg.k, cfg.n, cfg.M);
          ts[j].add(t, detail::z_covers(q, t, tr));
          t = var_Tp(vb, b, cfg.k, cfg.n, cfg.M);
          tp_plug[j].add(t, detail::z_covers(q, t, tr));
        } else {
          qbar_prop[j].add(q);
          bool neg = false;
          double t_m = var_TM(vb, b, cfg.M, &neg);
          tm[j].add(t_m);
          if (neg) ++tm_negative[j];
          else tm_pos[j].add(t_m, detail::z_covers(q, t_m, tr));
          double t = var_TM_adjusted(vb, b, cfg.k, cfg.n, cfg.M);
          tm_adj[j].add(t, detail::z_covers(q, t, tr));
          t = var_TsPPD(vb, cfg.k, cfg.n, cfg.M);
          tsppd[j].add(t, detail::z_covers(q, t, tr));
          t = var_Tp(vb, b, cfg.k, cfg.n, cfg.M);
          tp_prop[j].add(t, detail::z_covers(q, t, tr));
        }
      }
    }
  }

  SimReport report;
  for (std::size_t j = 0; j < p; ++j) {
    std::string name = j == 0 ? "intercept" : "y" + std::to_string(j + 1);
    TargetSummary plug;
    plug.name = name;
    plug.true_value = truth.q[j];
    plug.mean_qbar = qbar_plug[j].mean();
    plug.emp_variance = qbar_plug[j].variance();
    plug.estimators["T_s"] = ts[j].stats();
    plug.estimators["T_p"] = tp_plug[j].stats();
    report.plug_in.push_back(std::move(plug));

    TargetSummary prop;
    prop.name = name;
    prop.true_value = truth.q[j];
    prop.mean_qbar = qbar_prop[j].mean();
    prop.emp_variance = qbar_prop[j].variance();
    prop.negative_tm_fraction =
        static_cast<double>(tm_negative[j]) / cfg.n_sims;
    prop.estimators["T_M"] = tm[j].stats();
    prop.estimators["T_M>0"] = tm_pos[j].stats();
    prop.estimators["T_M-adjusted"] = tm_adj[j].stats();
    prop.estimators["T_s(PPD)"] = tsppd[j].stats();
    prop.estimators["T_p"] = tp_prop[j].stats();
    report.proper.push_back(std::move(prop));
  }
  return report;
}

}  // namespace synthlab::simlab
