#pragma once

#include <stdexcept>
#include <vector>

#include "synthlab/stats.hpp"

namespace synthlab::simlab {

struct StratEstimate {
  double estimate = 0.0;
  double variance = 0.0;
};

// Stratified mean with the fpc-bearing variance:
//   estimate = sum_h (N_h/N) ybar_h
//   variance = sum_h (1 - n_h/N_h) (N_h/N)^2 s_h^2 / n_h
inline StratEstimate stratified_mean(
    const std::vector<std::vector<double>>& values,
    const std::vector<double>& strata_sizes) {
  if (values.size() != strata_sizes.size() || values.empty())
    throw std::invalid_argument("stratified_mean: stratum count mismatch");
  double total = 0.0;
  for (double nh : strata_sizes) total += nh;

  StratEstimate out;
  for (std::size_t h = 0; h < values.size(); ++h) {
    const auto n_h = static_cast<double>(values[h].size());
    if (n_h < 2)
      throw std::invalid_argument("stratified_mean: stratum needs n_h >= 2");
    double w = strata_sizes[h] / total;
    double ybar = mean_of(values[h]);
    double s2 = sample_variance(values[h]);
    out.estimate += w * ybar;
    out.variance += (1.0 - n_h / strata_sizes[h]) * w * w * s2 / n_h;
  }
  return out;
}

}  // namespace synthlab::simlab
