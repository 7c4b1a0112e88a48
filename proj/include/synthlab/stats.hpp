#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace synthlab {

inline double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("sample_variance needs n >= 2");
  double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

// Type-7 style quantile with linear interpolation on a sorted vector.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty vector");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  double pos = p * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

// Quantile at position (r - 0.5)/k mapped into order statistics with linear
// interpolation; exact order statistics when k equals the pool size.
inline double midpoint_quantile(const std::vector<double>& sorted, double p) {
  const auto m = static_cast<double>(sorted.size());
  double pos = p * m - 0.5;  // 0-based fractional order statistic
  if (pos <= 0.0) return sorted.front();
  if (pos >= m - 1.0) return sorted.back();
  double snapped = std::round(pos);
  if (std::fabs(pos - snapped) < 1e-9)  // exact order statistic (e.g. k == m)
    return sorted[static_cast<std::size_t>(snapped)];
  auto lo = static_cast<std::size_t>(std::floor(pos));
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

// Normal-reference kernel bandwidth on a donor pool.
inline double smoothing_bandwidth(std::vector<double> donors) {
  if (donors.size() < 2) return 0.0;
  std::sort(donors.begin(), donors.end());
  double sd = std::sqrt(sample_variance(donors));
  double iqr = quantile_sorted(donors, 0.75) - quantile_sorted(donors, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  return 0.9 * spread *
         std::pow(static_cast<double>(donors.size()), -0.2);
}

inline double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("p out of range");
  // Acklam's rational approximation, refined with one Halley step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, x;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace synthlab
