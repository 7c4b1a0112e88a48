#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/stats.hpp"

namespace synthlab {

// Per-replicate point estimates q^(l) and their variances v^(l), one vector
// entry per model coefficient.
struct PerSynthesisEstimates {
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> v;
  int M = 0;
  long k = 0;  // synthetic sample size
  long n = 0;  // observed sample size
};

struct PooledStats {
  std::vector<double> q_bar;
  std::vector<double> v_bar;
  std::optional<std::vector<double>> b;  // between-synthesis; undefined at M=1
  int M = 0;
  long k = 0;
  long n = 0;
};

enum class Estimator { TM, Ts, TsPPD, Tp, TsDE, TMAdjusted, VBarOnly };

inline std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::TM: return "T_M";
    case Estimator::Ts: return "T_s";
    case Estimator::TsPPD: return "T_s(PPD)";
    case Estimator::Tp: return "T_p";
    case Estimator::TsDE: return "T_sDE";
    case Estimator::TMAdjusted: return "T_M-adjusted";
    case Estimator::VBarOnly: return "v_bar";
  }
  return "?";
}

inline Estimator estimator_from_string(const std::string& s) {
  if (s == "T_M" || s == "TM") return Estimator::TM;
  if (s == "T_s" || s == "Ts") return Estimator::Ts;
  if (s == "T_s(PPD)" || s == "TsPPD" || s == "T_sPPD") return Estimator::TsPPD;
  if (s == "T_p" || s == "Tp") return Estimator::Tp;
  if (s == "T_sDE" || s == "TsDE") return Estimator::TsDE;
  if (s == "T_M-adjusted" || s == "TMadj") return Estimator::TMAdjusted;
  if (s == "v_bar" || s == "vbar") return Estimator::VBarOnly;
  throw std::invalid_argument("unknown estimator: " + s);
}

struct CombinedEstimate {
  std::string coefficient;
  double estimate = 0.0;
  double variance = 0.0;
  std::string estimator_name;
  double ci_level = 0.95;
  double ci_low = 0.0, ci_high = 0.0;
  bool negative_variance = false;
  bool adjusted = false;
};

inline PooledStats pool(const PerSynthesisEstimates& per) {
  if (per.M < 1 || per.q.size() != static_cast<std::size_t>(per.M) ||
      per.v.size() != static_cast<std::size_t>(per.M))
    throw std::invalid_argument("pool: M does not match estimate count");
  const std::size_t p = per.q[0].size();
  for (int l = 0; l < per.M; ++l)
    if (per.q[static_cast<std::size_t>(l)].size() != p ||
        per.v[static_cast<std::size_t>(l)].size() != p)
      throw std::invalid_argument("pool: ragged estimate vectors");

  PooledStats out;
  out.M = per.M;
  out.k = per.k;
  out.n = per.n;
  out.q_bar.assign(p, 0.0);
  out.v_bar.assign(p, 0.0);
  for (int l = 0; l < per.M; ++l)
    for (std::size_t j = 0; j < p; ++j) {
      out.q_bar[j] += per.q[static_cast<std::size_t>(l)][j] / per.M;
      out.v_bar[j] += per.v[static_cast<std::size_t>(l)][j] / per.M;
    }
  if (per.M > 1) {
    std::vector<double> b(p, 0.0);
    for (int l = 0; l < per.M; ++l)
      for (std::size_t j = 0; j < p; ++j) {
        double d = per.q[static_cast<std::size_t>(l)][j] - out.q_bar[j];
        b[j] += d * d / (per.M - 1);
      }
    out.b = std::move(b);
  }
  return out;
}

// Scalar estimator kernels. `flag*` outputs report negative T_M and the
// adjusted-floor fallback.
inline double var_TM(double v_bar, double b, int M, bool* negative = nullptr) {
  if (M < 2) throw std::invalid_argument("T_M requires M >= 2");
  double t = b * (1.0 + 1.0 / M) - v_bar;
  if (negative) *negative = t < 0.0;
  return t;
}

inline double var_Ts(double v_bar, long k, long n, int M) {
  return v_bar * (static_cast<double>(k) / n + 1.0 / M);
}

inline double var_TsPPD(double v_bar, long k, long n, int M) {
  double kn = static_cast<double>(k) / n;
  return v_bar * (kn + (1.0 + kn) / M);
}

inline double var_Tp(double v_bar, double b, long k, long n, int M) {
  if (M < 2) throw std::invalid_argument("T_p requires M >= 2");
  return v_bar * (static_cast<double>(k) / n) + b / M;
}

inline double var_TsDE(double v_bar, long k, long n, int M, double de) {
  if (de <= 0.0) throw std::invalid_argument("design effect must be positive");
  return v_bar * (de * static_cast<double>(k) / n + 1.0 / M);
}

inline double var_TM_adjusted(double v_bar, double b, long k, long n, int M,
                              bool* adjusted = nullptr) {
  double t = var_TM(v_bar, b, M);
  if (t > 0.0) {
    if (adjusted) *adjusted = false;
    return t;
  }
  if (adjusted) *adjusted = true;
  return v_bar * (static_cast<double>(k) / n);
}

// Vector wrappers over PooledStats.
namespace detail {

inline const std::vector<double>& require_b(const PooledStats& p,
                                            const char* name) {
  if (!p.b)
    throw std::invalid_argument(std::string(name) + " requires M >= 2");
  return *p.b;
}

}  // namespace detail

inline std::vector<CombinedEstimate> combine(
    const PooledStats& p, Estimator est, double ci_level = 0.95,
    double design_effect = 1.0,
    const std::vector<std::string>& names = {}) {
  const std::size_t np = p.q_bar.size();
  double z = normal_quantile(0.5 + ci_level / 2.0);
  std::vector<CombinedEstimate> out(np);
  for (std::size_t j = 0; j < np; ++j) {
    CombinedEstimate& c = out[j];
    c.coefficient = j < names.size() ? names[j] : "coef" + std::to_string(j + 1);
    c.estimate = p.q_bar[j];
    c.estimator_name = to_string(est);
    c.ci_level = ci_level;
    switch (est) {
      case Estimator::TM:
        c.variance = var_TM(p.v_bar[j], detail::require_b(p, "T_M")[j], p.M,
                            &c.negative_variance);
        break;
      case Estimator::Ts:
        c.variance = var_Ts(p.v_bar[j], p.k, p.n, p.M);
        break;
      case Estimator::TsPPD:
        c.variance = var_TsPPD(p.v_bar[j], p.k, p.n, p.M);
        break;
      case Estimator::Tp:
        c.variance = var_Tp(p.v_bar[j], detail::require_b(p, "T_p")[j], p.k,
                            p.n, p.M);
        break;
      case Estimator::TsDE:
        c.variance = var_TsDE(p.v_bar[j], p.k, p.n, p.M, design_effect);
        break;
      case Estimator::TMAdjusted:
        c.variance = var_TM_adjusted(p.v_bar[j],
                                     detail::require_b(p, "T_M-adjusted")[j],
                                     p.k, p.n, p.M, &c.adjusted);
        break;
      case Estimator::VBarOnly:
        c.variance = p.v_bar[j];
        break;
    }
    if (c.variance >= 0.0) {
      double hw = z * std::sqrt(c.variance);
      c.ci_low = c.estimate - hw;
      c.ci_high = c.estimate + hw;
    } else {
      // negative T_M: interval undefined
      c.ci_low = c.ci_high = std::nan("");
    }
  }
  return out;
}

}  // namespace synthlab
