#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/analyze.hpp"
#include "synthlab/table.hpp"

namespace synthlab {

struct MarginalComparison {
  std::string variable;
  std::vector<std::string> bin_labels;
  std::vector<double> observed;   // proportions
  std::vector<double> synthetic;  // proportions, averaged over replicates
  double max_abs_difference = 0.0;

  std::vector<double> differences() const {
    std::vector<double> d(observed.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = synthetic[i] - observed[i];
    return d;
  }
};

// Observed vs synthetic marginal distribution of one variable. Categorical:
// one bin per level plus one per missing code. Continuous: equal-width bins
// over the observed range — either a fixed width or 20 bins by default.
inline MarginalComparison compare_marginals(
    const DataTable& observed, const std::vector<DataTable>& replicates,
    const std::string& variable, double bin_width = 0.0) {
  if (replicates.empty())
    throw std::invalid_argument("compare_marginals: no replicates");
  const VariableDef& v = observed.schema().var(variable);

  MarginalComparison out;
  out.variable = variable;

  if (v.kind == VarKind::Categorical) {
    const std::size_t nb = v.levels.size() + v.missing_codes.size();
    out.bin_labels = v.levels;
    for (const auto& mc : v.missing_codes) out.bin_labels.push_back(mc);
    auto props = [&](const DataTable& t) {
      std::vector<double> p(nb, 0.0);
      const Column& col = t.column(variable);
      for (const Cell& c : col) {
        std::size_t i = c.is_missing()
                            ? v.levels.size() + static_cast<std::size_t>(c.missing_code)
                            : static_cast<std::size_t>(c.value);
        p[i] += 1.0 / static_cast<double>(col.size());
      }
      return p;
    };
    out.observed = props(observed);
    out.synthetic.assign(nb, 0.0);
    for (const DataTable& rep : replicates) {
      std::vector<double> p = props(rep);
      for (std::size_t i = 0; i < nb; ++i)
        out.synthetic[i] += p[i] / static_cast<double>(replicates.size());
    }
  } else {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Cell& c : observed.column(variable))
      if (!c.is_missing()) {
        lo = std::min(lo, c.value);
        hi = std::max(hi, c.value);
      }
    if (!(lo < hi)) hi = lo + 1.0;
    double width = bin_width > 0.0 ? bin_width : (hi - lo) / 20.0;
    auto nb = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    if (nb == 0) nb = 1;
    for (std::size_t b = 0; b < nb; ++b) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "[%g,%g)", lo + b * width,
                    lo + (b + 1) * width);
      out.bin_labels.push_back(buf);
    }
    for (const auto& mc : v.missing_codes) out.bin_labels.push_back(mc);
    const std::size_t total_bins = nb + v.missing_codes.size();
    auto props = [&](const DataTable& t) {
      std::vector<double> p(total_bins, 0.0);
      const Column& col = t.column(variable);
      for (const Cell& c : col) {
        std::size_t i;
        if (c.is_missing()) {
          i = nb + static_cast<std::size_t>(c.missing_code);
        } else {
          double pos = (c.value - lo) / width;
          i = pos < 0.0 ? 0 : std::min(nb - 1, static_cast<std::size_t>(pos));
        }
        p[i] += 1.0 / static_cast<double>(col.size());
      }
      return p;
    };
    out.observed = props(observed);
    out.synthetic.assign(total_bins, 0.0);
    for (const DataTable& rep : replicates) {
      std::vector<double> p = props(rep);
      for (std::size_t i = 0; i < total_bins; ++i)
        out.synthetic[i] += p[i] / static_cast<double>(replicates.size());
    }
  }
  for (std::size_t i = 0; i < out.observed.size(); ++i)
    out.max_abs_difference = std::max(
        out.max_abs_difference, std::fabs(out.synthetic[i] - out.observed[i]));
  return out;
}

struct CoefficientComparison {
  struct Row {
    std::string coefficient;
    double observed = 0.0;
    double observed_se = 0.0;
    double synthetic = 0.0;     // pooled q_bar
    double synthetic_lo = 0.0;  // q_bar - sqrt(v_bar)
    double synthetic_hi = 0.0;
    double z = 0.0;        // (q_bar - q_obs)/SE_obs
    double z_bias = 0.0;   // bias z-test on SE_obs * sqrt(1 + 1/M)
  };
  std::vector<Row> rows;
  std::string note =
      "bias z-test scale SE_obs*sqrt(1+1/M) is a construction of this tool";
};

inline CoefficientComparison compare_coefficients(
    const DataTable& observed, const std::vector<DataTable>& replicates,
    const AnalysisSpec& model) {
  if (replicates.empty())
    throw std::invalid_argument("compare_coefficients: no replicates");
  ModelFit obs = fit_model(observed, model);

  const auto M = static_cast<double>(replicates.size());
  std::vector<double> q_bar(obs.coef.size(), 0.0), v_bar(obs.coef.size(), 0.0);
  for (const DataTable& rep : replicates) {
    ModelFit f = fit_model(rep, model);
    if (f.names != obs.names)
      throw std::runtime_error("coefficient layout differs between observed and synthetic fits");
    for (std::size_t j = 0; j < q_bar.size(); ++j) {
      q_bar[j] += f.coef[j] / M;
      v_bar[j] += f.var[j] / M;
    }
  }

  CoefficientComparison out;
  for (std::size_t j = 0; j < q_bar.size(); ++j) {
    CoefficientComparison::Row row;
    row.coefficient = obs.names[j];
    row.observed = obs.coef[j];
    row.observed_se = std::sqrt(obs.var[j]);
    row.synthetic = q_bar[j];
    double hw = std::sqrt(v_bar[j]);
    row.synthetic_lo = q_bar[j] - hw;
    row.synthetic_hi = q_bar[j] + hw;
    double d = q_bar[j] - obs.coef[j];
    row.z = row.observed_se > 0.0 ? d / row.observed_se : 0.0;
    double bias_se = row.observed_se * std::sqrt(1.0 + 1.0 / M);
    row.z_bias = bias_se > 0.0 ? d / bias_se : 0.0;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace synthlab
