#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/combine.hpp"
#include "synthlab/formula.hpp"
#include "synthlab/glm.hpp"
#include "synthlab/ols.hpp"

namespace synthlab {

struct ModelFit {
  std::vector<double> coef;
  std::vector<double> var;  // diagonal of the coefficient covariance
  std::vector<std::string> names;
  std::size_t n_used = 0;
};

namespace detail {

inline DesignMatrix as_design(const AnalysisDesign& ad) {
  DesignMatrix dm;
  dm.X = ad.X;
  for (const auto& name : ad.names)
    dm.cols.push_back({DesignColKind::Continuous, -1, -1, name});
  return dm;
}

}  // namespace detail

inline ModelFit fit_model(const DataTable& table, const AnalysisSpec& spec) {
  AnalysisDesign ad = build_analysis_design(table, spec);
  DesignMatrix dm = detail::as_design(ad);
  ModelFit out;
  out.names = ad.names;
  out.n_used = ad.y.size();
  if (spec.kind == ModelKind::Linear) {
    OlsFit f = fit_ols(ad.y, dm);
    for (Eigen::Index j = 0; j < f.est.coef.size(); ++j) {
      out.coef.push_back(f.est.coef(j));
      out.var.push_back(f.est.sigma2 * f.xtx_inv(j, j));
    }
  } else {
    std::vector<int> y(ad.y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(ad.y[i]);
    GlmFit f = fit_logit(y, dm);
    if (!f.converged)
      throw std::runtime_error("logistic fit did not converge");
    for (Eigen::Index j = 0; j < f.coef.cols(); ++j) {
      out.coef.push_back(f.coef(0, j));
      out.var.push_back(f.cov(j, j));
    }
  }
  return out;
}

inline std::vector<CombinedEstimate> analyze_synthetic(
    const std::vector<DataTable>& replicates, const AnalysisSpec& spec,
    Estimator estimator, long n, double ci_level = 0.95,
    double design_effect = 1.0) {
  if (replicates.empty())
    throw std::invalid_argument("analyze_synthetic: no replicates");
  PerSynthesisEstimates per;
  per.M = static_cast<int>(replicates.size());
  per.k = static_cast<long>(replicates[0].n_rows());
  per.n = n;
  std::vector<std::string> names;
  for (std::size_t l = 0; l < replicates.size(); ++l) {
    ModelFit f;
    try {
      f = fit_model(replicates[l], spec);
    } catch (const std::exception& e) {
      throw std::runtime_error("replicate " + std::to_string(l + 1) +
                               ": " + e.what());
    }
    if (l == 0) names = f.names;
    else if (f.names != names)
      throw std::runtime_error("replicate " + std::to_string(l + 1) +
                               ": coefficient layout differs");
    per.q.push_back(f.coef);
    per.v.push_back(f.var);
  }
  return combine(pool(per), estimator, ci_level, design_effect, names);
}

}  // namespace synthlab
