#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "synthlab/cart.hpp"
#include "synthlab/glm.hpp"
#include "synthlab/method.hpp"
#include "synthlab/ols.hpp"
#include "synthlab/rng.hpp"
#include "synthlab/stats.hpp"

namespace synthlab {

// Marginal donor pool; the fallback for the first variable in a visit
// sequence, which has no predictors.
struct EmpiricalFit {
  bool categorical_target = false;
  std::vector<double> donors;
  std::optional<std::vector<double>> boot;  // proper: bootstrap of the donors

  const std::vector<double>& active() const { return boot ? *boot : donors; }
};

inline std::vector<double> empirical_sample(const std::vector<double>& donors,
                                            std::size_t k, RngStream& rng,
                                            bool smoothing = false) {
  if (donors.empty())
    throw std::invalid_argument("empirical_sample: empty donor pool");
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i)
    out[i] = donors[rng.uniform_index(donors.size())];
  if (smoothing) {
    double bw = smoothing_bandwidth(donors);
    if (bw > 0.0)
      for (double& v : out) v += rng.normal(0.0, bw);
  }
  return out;
}

inline EmpiricalFit draw_posterior(const EmpiricalFit& fit, RngStream& rng) {
  EmpiricalFit out = fit;
  std::vector<double> boot(fit.donors.size());
  for (std::size_t i = 0; i < boot.size(); ++i)
    boot[i] = fit.donors[rng.uniform_index(fit.donors.size())];
  out.boot = std::move(boot);
  return out;
}

// A fitted conditional model together with its generation procedure.
struct FittedGenerator {
  MethodSpec method;
  std::variant<EmpiricalFit, OlsFit, GlmFit, CartFit> model;
  std::vector<double> donors;  // continuous targets: observed pool for
                               // normrank / smoothing
  std::vector<std::string> warnings;

  bool has_posterior_draw() const {
    if (const auto* m = std::get_if<OlsFit>(&model)) return m->draw.has_value();
    if (const auto* m = std::get_if<GlmFit>(&model)) return m->draw.has_value();
    if (const auto* m = std::get_if<CartFit>(&model)) return m->is_bootstrap_refit;
    if (const auto* m = std::get_if<EmpiricalFit>(&model)) return m->boot.has_value();
    return false;
  }
};

// y is a continuous target or encoded class ids depending on the method.
inline FittedGenerator fit_generator(const MethodSpec& spec,
                                     const std::vector<double>& y_num,
                                     const std::vector<int>& y_cat,
                                     int n_classes, const DesignMatrix& dm) {
  FittedGenerator g;
  g.method = spec;
  switch (spec.kind) {
    case MethodKind::Empirical: {
      EmpiricalFit f;
      f.categorical_target = !y_cat.empty();
      if (f.categorical_target)
        for (int c : y_cat) f.donors.push_back(static_cast<double>(c));
      else
        f.donors = y_num;
      g.model = std::move(f);
      break;
    }
    case MethodKind::Norm:
      g.model = fit_ols(y_num, dm);
      g.donors = y_num;
      break;
    case MethodKind::Normrank:
      g.model = fit_ols(y_num, dm);
      g.donors = y_num;
      break;
    case MethodKind::Logit: {
      if (n_classes != 2)
        throw std::invalid_argument("logit requires a binary target");
      GlmFit f = fit_logit(y_cat, dm);
      g.warnings = f.warnings;
      g.model = std::move(f);
      break;
    }
    case MethodKind::Polyreg: {
      if (n_classes < 2)
        throw std::invalid_argument("polyreg requires >= 2 levels");
      GlmFit f = fit_polyreg(y_cat, dm, n_classes);
      g.warnings = f.warnings;
      g.model = std::move(f);
      break;
    }
    case MethodKind::Cart:
      if (!y_cat.empty()) {
        g.model = fit_cart(y_cat, n_classes, dm, spec.cart);
      } else {
        g.model = fit_cart(y_num, dm, spec.cart);
        g.donors = y_num;
      }
      break;
  }
  return g;
}

inline FittedGenerator draw_posterior(const FittedGenerator& fit, RngStream& rng) {
  FittedGenerator out = fit;
  std::visit([&](const auto& m) { out.model = draw_posterior(m, rng); }, fit.model);
  return out;
}

// Continuous generation; dispatches on the fitted method.
inline std::vector<double> generate_continuous(const FittedGenerator& fit,
                                               const DesignMatrix& xnew,
                                               RngStream& rng) {
  switch (fit.method.kind) {
    case MethodKind::Empirical:
      return empirical_sample(std::get<EmpiricalFit>(fit.model).active(),
                              static_cast<std::size_t>(xnew.rows()), rng,
                              fit.method.smoothing);
    case MethodKind::Norm:
      return generate_norm(std::get<OlsFit>(fit.model), xnew, rng);
    case MethodKind::Normrank:
      return generate_normrank(std::get<OlsFit>(fit.model), xnew, fit.donors,
                               rng, fit.method.smoothing);
    case MethodKind::Cart:
      return cart_generate(std::get<CartFit>(fit.model), xnew, rng,
                           fit.method.smoothing);
    default:
      throw std::logic_error("method does not generate continuous values");
  }
}

inline std::vector<int> generate_classes(const FittedGenerator& fit,
                                         const DesignMatrix& xnew,
                                         RngStream& rng) {
  switch (fit.method.kind) {
    case MethodKind::Empirical: {
      std::vector<double> v =
          empirical_sample(std::get<EmpiricalFit>(fit.model).active(),
                           static_cast<std::size_t>(xnew.rows()), rng, false);
      std::vector<int> out(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<int>(v[i]);
      return out;
    }
    case MethodKind::Logit:
    case MethodKind::Polyreg:
      return generate_categorical(std::get<GlmFit>(fit.model), xnew, rng);
    case MethodKind::Cart: {
      std::vector<double> v =
          cart_generate(std::get<CartFit>(fit.model), xnew, rng, false);
      std::vector<int> out(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<int>(v[i]);
      return out;
    }
    default:
      throw std::logic_error("method does not generate categorical values");
  }
}

}  // namespace synthlab
