#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/design.hpp"
#include "synthlab/rng.hpp"
#include "synthlab/stats.hpp"

namespace synthlab {

struct NormParams {
  Eigen::VectorXd coef;
  double sigma2 = 0.0;
};

// Least-squares fit of a continuous target; shared by the plain normal
// generator and the rank-preserving (normrank) variant.
struct OlsFit {
  NormParams est;
  Eigen::MatrixXd xtx_inv;
  double rss = 0.0;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  std::optional<NormParams> draw;  // present after a posterior draw

  const NormParams& active() const { return draw ? *draw : est; }
};

inline OlsFit fit_ols(const std::vector<double>& y, const DesignMatrix& dm) {
  const Eigen::Index n = dm.rows();
  const Eigen::Index p = dm.columns();
  if (n != static_cast<Eigen::Index>(y.size()))
    throw std::invalid_argument("fit_ols: y length does not match design rows");
  if (n <= p)
    throw std::invalid_argument("fit_ols: need more rows than columns (n=" +
                                std::to_string(n) + ", p=" + std::to_string(p) + ")");

  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.X);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    // name the columns past the numerical rank under pivoting
    std::string bad;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < p; ++j) {
      if (!bad.empty()) bad += ", ";
      bad += dm.cols[static_cast<std::size_t>(perm(j))].name;
    }
    throw std::invalid_argument("fit_ols: design is rank deficient (collinear: " +
                                bad + ")");
  }

  OlsFit fit;
  fit.n = n;
  fit.p = p;
  fit.est.coef = qr.solve(yv);
  Eigen::VectorXd resid = yv - dm.X * fit.est.coef;
  fit.rss = resid.squaredNorm();
  fit.est.sigma2 = fit.rss / static_cast<double>(n - p);
  fit.xtx_inv = (dm.X.transpose() * dm.X).inverse();
  return fit;
}

// sigma2 from its scaled inverse chi-square posterior with n - p df, then
// coefficients from N(theta_hat, sigma2_draw (X'X)^-1).
inline OlsFit draw_posterior(const OlsFit& fit, RngStream& rng) {
  OlsFit out = fit;
  NormParams d;
  double chi = rng.chisq(static_cast<double>(fit.n - fit.p));
  d.sigma2 = chi > 0.0 ? fit.rss / chi : fit.est.sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(d.sigma2 * fit.xtx_inv);
  Eigen::VectorXd z(fit.p);
  for (Eigen::Index i = 0; i < fit.p; ++i) z(i) = rng.normal();
  if (llt.info() == Eigen::Success)
    d.coef = fit.est.coef + llt.matrixL() * z;
  else
    d.coef = fit.est.coef;  // zero residual variance
  out.draw = std::move(d);
  return out;
}

inline std::vector<double> generate_norm(const OlsFit& fit,
                                         const DesignMatrix& xnew,
                                         RngStream& rng) {
  if (xnew.columns() != fit.p)
    throw std::invalid_argument("generate_norm: design width mismatch");
  const NormParams& par = fit.active();
  Eigen::VectorXd mu = xnew.X * par.coef;
  double sd = std::sqrt(std::max(0.0, par.sigma2));
  std::vector<double> out(static_cast<std::size_t>(xnew.rows()));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = mu(static_cast<Eigen::Index>(i)) + (sd > 0.0 ? rng.normal(0.0, sd) : 0.0);
  return out;
}

// Generate from the normal model, then replace the value of rank r among the
// k generated with the donor-pool quantile at (r - 0.5)/k. With k equal to
// the donor count and no smoothing this reproduces the donor multiset.
inline std::vector<double> generate_normrank(const OlsFit& fit,
                                             const DesignMatrix& xnew,
                                             const std::vector<double>& donors,
                                             RngStream& rng, bool smoothing) {
  if (donors.empty())
    throw std::invalid_argument("generate_normrank: empty donor pool");
  std::vector<double> raw = generate_norm(fit, xnew, rng);
  const std::size_t k = raw.size();

  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });

  std::vector<double> sorted_donors = donors;
  std::sort(sorted_donors.begin(), sorted_donors.end());

  std::vector<double> out(k);
  for (std::size_t r = 0; r < k; ++r) {
    double p = (static_cast<double>(r) + 0.5) / static_cast<double>(k);
    out[order[r]] = midpoint_quantile(sorted_donors, p);
  }
  if (smoothing) {
    double bw = smoothing_bandwidth(donors);
    if (bw > 0.0)
      for (double& v : out) v += rng.normal(0.0, bw);
  }
  return out;
}

}  // namespace synthlab
