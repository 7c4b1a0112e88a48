#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "synthlab/rng.hpp"

namespace synthlab::simlab {

// rows ~ N(mean, chol_l * chol_l^T)
inline Eigen::MatrixXd mvn_sample(const Eigen::VectorXd& mean,
                                  const Eigen::MatrixXd& chol_l,
                                  Eigen::Index rows, RngStream& rng) {
  const Eigen::Index d = mean.size();
  Eigen::MatrixXd z(rows, d);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.normal();
  Eigen::MatrixXd out = z * chol_l.transpose();
  out.rowwise() += mean.transpose();
  return out;
}

// Bartlett decomposition: A = T T^T ~ Wishart(df, I)
inline Eigen::MatrixXd wishart_identity(double df, Eigen::Index d,
                                        RngStream& rng) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    t(i, i) = std::sqrt(rng.chisq(df - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) t(i, j) = rng.normal();
  }
  return t * t.transpose();
}

// Sigma ~ InverseWishart(df, scale): with scale = C C^T and A ~ Wishart(df, I),
// Sigma = C A^{-1} C^T.
inline Eigen::MatrixXd inverse_wishart(double df, const Eigen::MatrixXd& scale,
                                       RngStream& rng) {
  const Eigen::Index d = scale.rows();
  if (df <= static_cast<double>(d) - 1.0)
    throw std::invalid_argument("inverse_wishart: df too small");
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("inverse_wishart: scale not positive definite");
  Eigen::MatrixXd c = llt.matrixL();
  Eigen::MatrixXd a = wishart_identity(df, d, rng);
  Eigen::MatrixXd a_inv = a.llt().solve(Eigen::MatrixXd::Identity(d, d));
  return c * a_inv * c.transpose();
}

struct MvnFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;       // unbiased sample covariance
  Eigen::MatrixXd centered_sscp;  // sum of squares and cross products
  Eigen::Index n = 0;
};

inline MvnFit fit_mvn(const Eigen::MatrixXd& x) {
  MvnFit f;
  f.n = x.rows();
  if (f.n < x.cols() + 2)
    throw std::invalid_argument("fit_mvn: too few rows");
  f.mean = x.colwise().mean();
  Eigen::MatrixXd c = x.rowwise() - f.mean.transpose();
  f.centered_sscp = c.transpose() * c;
  f.cov = f.centered_sscp / static_cast<double>(f.n - 1);
  return f;
}

// Posterior draw under the noninformative prior: Sigma ~ IW(n-1, S),
// mu | Sigma ~ N(mean, Sigma/n).
struct MvnParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline MvnParams mvn_posterior_draw(const MvnFit& fit, RngStream& rng) {
  MvnParams p;
  p.cov = inverse_wishart(static_cast<double>(fit.n - 1), fit.centered_sscp, rng);
  Eigen::MatrixXd l =
      (p.cov / static_cast<double>(fit.n)).llt().matrixL();
  Eigen::VectorXd z(fit.mean.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
  p.mean = fit.mean + l * z;
  return p;
}

}  // namespace synthlab::simlab
