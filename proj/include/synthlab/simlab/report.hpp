#pragma once

#include <map>
#include <string>
#include <vector>

namespace synthlab::simlab {

struct EstimatorStats {
  double mean = 0.0;      // mean of the estimator over simulations
  double variance = 0.0;  // variance of the estimator over simulations
  double coverage = 0.0;  // percent of 95% intervals containing the truth
  long n_used = 0;        // simulations contributing (e.g. T_M > 0 subsets)
};

struct TargetSummary {
  std::string name;
  double true_value = 0.0;
  double mean_qbar = 0.0;
  double emp_variance = 0.0;  // empirical variance of q_bar over simulations
  double negative_tm_fraction = 0.0;
  std::map<std::string, EstimatorStats> estimators;
};

struct SimReport {
  std::vector<TargetSummary> plug_in;
  std::vector<TargetSummary> proper;
  std::vector<std::string> notes;
};

namespace detail {

// streaming mean/variance plus interval-coverage bookkeeping
struct Accumulator {
  double sum = 0.0, sum2 = 0.0;
  long n = 0;
  long covered = 0;

  void add(double value) {
    sum += value;
    sum2 += value * value;
    ++n;
  }
  void add(double value, bool covers) {
    add(value);
    if (covers) ++covered;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    return (sum2 - sum * sum / n) / (n - 1);
  }
  double coverage_pct() const { return n ? 100.0 * covered / n : 0.0; }

  EstimatorStats stats() const {
    return {mean(), variance(), coverage_pct(), n};
  }
};

inline bool z_covers(double estimate, double variance, double truth) {
  if (variance < 0.0) return false;
  double hw = 1.959963984540054 * std::sqrt(variance);
  return truth >= estimate - hw && truth <= estimate + hw;
}

}  // namespace detail

}  // namespace synthlab::simlab
