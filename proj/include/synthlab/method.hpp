#pragma once

#include <stdexcept>
#include <string>

namespace synthlab {

enum class MethodKind { Empirical, Norm, Normrank, Logit, Polyreg, Cart };

struct CartControls {
  int min_leaf_size = 5;
  int max_depth = 30;
  double min_split_improvement = 1e-8;
};

struct MethodSpec {
  MethodKind kind = MethodKind::Cart;
  bool proper = false;
  bool smoothing = false;  // continuous targets only
  CartControls cart;
};

inline MethodKind method_kind_from_string(const std::string& s) {
  if (s == "empirical") return MethodKind::Empirical;
  if (s == "norm") return MethodKind::Norm;
  if (s == "normrank") return MethodKind::Normrank;
  if (s == "logit") return MethodKind::Logit;
  if (s == "polyreg") return MethodKind::Polyreg;
  if (s == "cart") return MethodKind::Cart;
  throw std::invalid_argument("unknown method: " + s);
}

inline std::string to_string(MethodKind k) {
  switch (k) {
    case MethodKind::Empirical: return "empirical";
    case MethodKind::Norm: return "norm";
    case MethodKind::Normrank: return "normrank";
    case MethodKind::Logit: return "logit";
    case MethodKind::Polyreg: return "polyreg";
    case MethodKind::Cart: return "cart";
  }
  return "?";
}

}  // namespace synthlab
