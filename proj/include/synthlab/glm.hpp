#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/design.hpp"
#include "synthlab/rng.hpp"

namespace synthlab {

// Multinomial logit fit (binary logit is the two-class case). Coefficients
// are (J-1) x p with the first class as baseline.
struct GlmFit {
  Eigen::MatrixXd coef;
  Eigen::MatrixXd cov;  // ((J-1)p) x ((J-1)p) inverse observed information
  int n_classes = 2;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  double deviance = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
  std::optional<Eigen::MatrixXd> draw;

  const Eigen::MatrixXd& active() const { return draw ? *draw : coef; }
};

namespace detail {

// class probabilities for one row given linear predictors eta_1..eta_{J-1}
// (baseline eta_0 = 0), computed via log-sum-exp
inline void class_probs(const Eigen::VectorXd& eta, Eigen::VectorXd& probs) {
  const Eigen::Index jm1 = eta.size();
  probs.resize(jm1 + 1);
  double mx = 0.0;
  for (Eigen::Index j = 0; j < jm1; ++j) mx = std::max(mx, eta(j));
  double denom = std::exp(-mx);
  for (Eigen::Index j = 0; j < jm1; ++j) denom += std::exp(eta(j) - mx);
  probs(0) = std::exp(-mx) / denom;
  for (Eigen::Index j = 0; j < jm1; ++j) probs(j + 1) = std::exp(eta(j) - mx) / denom;
}

inline double multinom_deviance(const Eigen::MatrixXd& X,
                                const std::vector<int>& y,
                                const Eigen::MatrixXd& B) {
  const Eigen::Index n = X.rows();
  const Eigen::Index jm1 = B.rows();
  double dev = 0.0;
  Eigen::VectorXd eta(jm1), probs;
  for (Eigen::Index i = 0; i < n; ++i) {
    eta.noalias() = B * X.row(i).transpose();
    class_probs(eta, probs);
    double pi = std::max(probs(y[static_cast<std::size_t>(i)]), 1e-300);
    dev -= 2.0 * std::log(pi);
  }
  return dev;
}

}  // namespace detail

// Newton iterations on the multinomial log-likelihood; convergence when
// max |score| < 1e-8 or the relative deviance change < 1e-10. Separation or
// sparse cells produce a warning on the fit, not an error.
inline GlmFit fit_multinomial(const std::vector<int>& y, const DesignMatrix& dm,
                              int n_classes) {
  const Eigen::Index n = dm.rows();
  const Eigen::Index p = dm.columns();
  if (n != static_cast<Eigen::Index>(y.size()))
    throw std::invalid_argument("fit: y length does not match design rows");
  if (n_classes < 2) throw std::invalid_argument("fit: need at least 2 classes");

  std::vector<long> counts(static_cast<std::size_t>(n_classes), 0);
  for (int c : y) {
    if (c < 0 || c >= n_classes)
      throw std::invalid_argument("fit: class id out of range");
    ++counts[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < n_classes; ++c)
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw std::invalid_argument("fit: class " + std::to_string(c) +
                                  " has no observations");

  const Eigen::Index jm1 = n_classes - 1;
  const Eigen::Index q = jm1 * p;

  GlmFit fit;
  fit.n_classes = n_classes;
  fit.n = n;
  fit.p = p;
  fit.coef = Eigen::MatrixXd::Zero(jm1, p);

  double dev = detail::multinom_deviance(dm.X, y, fit.coef);
  Eigen::VectorXd score(q);
  Eigen::MatrixXd info(q, q);
  Eigen::VectorXd eta(jm1), probs;

  const int max_iter = 50;
  for (int iter = 0; iter < max_iter; ++iter) {
    score.setZero();
    info.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      eta.noalias() = fit.coef * dm.X.row(i).transpose();
      detail::class_probs(eta, probs);
      const int yi = y[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < jm1; ++j) {
        double resid = (yi == j + 1 ? 1.0 : 0.0) - probs(j + 1);
        score.segment(j * p, p) += resid * dm.X.row(i).transpose();
        for (Eigen::Index kk = j; kk < jm1; ++kk) {
          double w = probs(j + 1) * ((j == kk ? 1.0 : 0.0) - probs(kk + 1));
          // accumulate -w * x x' into the (j,kk) block; symmetrized below
          info.block(j * p, kk * p, p, p).noalias() -=
              w * (dm.X.row(i).transpose() * dm.X.row(i));
        }
      }
    }
    info = -info;  // observed information
    for (Eigen::Index j = 0; j < jm1; ++j)
      for (Eigen::Index kk = 0; kk < j; ++kk)
        info.block(j * p, kk * p, p, p) =
            info.block(kk * p, j * p, p, p).transpose();

    if (score.lpNorm<Eigen::Infinity>() < 1e-8) {
      fit.converged = true;
      break;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) {
      fit.warnings.push_back("separation/sparse-cells: singular information");
      break;
    }
    Eigen::VectorXd step = ldlt.solve(score);

    // step-halving if the deviance does not improve
    Eigen::MatrixXd old_coef = fit.coef;
    double new_dev = dev;
    double scale = 1.0;
    for (int half = 0; half < 8; ++half) {
      for (Eigen::Index j = 0; j < jm1; ++j)
        fit.coef.row(j) = old_coef.row(j) + scale * step.segment(j * p, p).transpose();
      new_dev = detail::multinom_deviance(dm.X, y, fit.coef);
      if (new_dev <= dev + 1e-12) break;
      scale *= 0.5;
    }
    double rel = std::fabs(dev - new_dev) / (std::fabs(dev) + 1e-300);
    dev = new_dev;
    if (rel < 1e-10) {
      fit.converged = true;
      break;
    }
  }
  fit.deviance = dev;

  // final information for the covariance
  info.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    eta.noalias() = fit.coef * dm.X.row(i).transpose();
    detail::class_probs(eta, probs);
    for (Eigen::Index j = 0; j < jm1; ++j)
      for (Eigen::Index kk = j; kk < jm1; ++kk) {
        double w = probs(j + 1) * ((j == kk ? 1.0 : 0.0) - probs(kk + 1));
        info.block(j * p, kk * p, p, p).noalias() +=
            w * (dm.X.row(i).transpose() * dm.X.row(i));
      }
  }
  for (Eigen::Index j = 0; j < jm1; ++j)
    for (Eigen::Index kk = 0; kk < j; ++kk)
      info.block(j * p, kk * p, p, p) =
          info.block(kk * p, j * p, p, p).transpose();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive())
    fit.cov = ldlt.solve(Eigen::MatrixXd::Identity(q, q));
  else
    fit.cov = Eigen::MatrixXd::Zero(q, q);

  if (!fit.converged)
    fit.warnings.push_back("separation/sparse-cells: no convergence in 50 iterations");
  if (fit.coef.cwiseAbs().maxCoeff() > 30.0)
    fit.warnings.push_back("separation/sparse-cells: coefficient magnitude > 30");
  return fit;
}

inline GlmFit fit_logit(const std::vector<int>& y, const DesignMatrix& dm) {
  return fit_multinomial(y, dm, 2);
}

inline GlmFit fit_polyreg(const std::vector<int>& y, const DesignMatrix& dm,
                          int n_classes) {
  return fit_multinomial(y, dm, n_classes);
}

// Coefficients drawn from N(vec(B_hat), inverse observed information).
inline GlmFit draw_posterior(const GlmFit& fit, RngStream& rng) {
  GlmFit out = fit;
  const Eigen::Index jm1 = fit.n_classes - 1;
  const Eigen::Index q = jm1 * fit.p;
  Eigen::LLT<Eigen::MatrixXd> llt(fit.cov);
  Eigen::MatrixXd d = fit.coef;
  if (llt.info() == Eigen::Success) {
    Eigen::VectorXd z(q);
    for (Eigen::Index i = 0; i < q; ++i) z(i) = rng.normal();
    Eigen::VectorXd delta = llt.matrixL() * z;
    for (Eigen::Index j = 0; j < jm1; ++j)
      d.row(j) += delta.segment(j * fit.p, fit.p).transpose();
  }
  out.draw = std::move(d);
  return out;
}

inline Eigen::VectorXd predict_probs_row(const GlmFit& fit,
                                         const Eigen::RowVectorXd& x) {
  Eigen::VectorXd eta = fit.active() * x.transpose();
  Eigen::VectorXd probs;
  detail::class_probs(eta, probs);
  return probs;
}

// Each row sampled independently from its fitted class probabilities.
inline std::vector<int> generate_categorical(const GlmFit& fit,
                                             const DesignMatrix& xnew,
                                             RngStream& rng) {
  if (xnew.columns() != fit.p)
    throw std::invalid_argument("generate_categorical: design width mismatch");
  std::vector<int> out(static_cast<std::size_t>(xnew.rows()));
  Eigen::VectorXd eta, probs;
  for (Eigen::Index i = 0; i < xnew.rows(); ++i) {
    eta.noalias() = fit.active() * xnew.X.row(i).transpose();
    detail::class_probs(eta, probs);
    double u = rng.uniform();
    double acc = 0.0;
    int pick = fit.n_classes - 1;
    for (int j = 0; j < fit.n_classes; ++j) {
      acc += probs(j);
      if (u < acc) {
        pick = j;
        break;
      }
    }
    out[static_cast<std::size_t>(i)] = pick;
  }
  return out;
}

}  // namespace synthlab
