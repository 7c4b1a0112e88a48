#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace synthlab {

enum class VarKind { Categorical, Continuous };
enum class VarRole { Synthesize, KeepUnchanged, Stratum, Weight };

struct VariableDef {
  std::string name;
  VarKind kind = VarKind::Continuous;
  std::vector<std::string> levels;         // categorical only
  std::vector<std::string> missing_codes;  // raw tokens, e.g. "-999"
  VarRole role = VarRole::Synthesize;

  bool has_missing_codes() const { return !missing_codes.empty(); }

  int level_index(const std::string& s) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (levels[i] == s) return static_cast<int>(i);
    return -1;
  }

  int missing_code_index(const std::string& token) const {
    for (std::size_t i = 0; i < missing_codes.size(); ++i)
      if (missing_codes[i] == token) return static_cast<int>(i);
    return -1;
  }
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<VariableDef> vars) : vars_(std::move(vars)) {
    validate();
  }

  const std::vector<VariableDef>& variables() const { return vars_; }
  std::size_t size() const { return vars_.size(); }
  const VariableDef& var(std::size_t i) const { return vars_[i]; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  const VariableDef& var(const std::string& name) const {
    int i = index_of(name);
    if (i < 0) throw std::invalid_argument("unknown variable: " + name);
    return vars_[static_cast<std::size_t>(i)];
  }

  std::optional<std::string> stratum_variable() const {
    for (const auto& v : vars_)
      if (v.role == VarRole::Stratum) return v.name;
    return std::nullopt;
  }

  std::optional<std::string> weight_variable() const {
    for (const auto& v : vars_)
      if (v.role == VarRole::Weight) return v.name;
    return std::nullopt;
  }

 private:
  void validate() const {
    std::set<std::string> names;
    int n_stratum = 0, n_weight = 0;
    for (const auto& v : vars_) {
      if (v.name.empty()) throw std::invalid_argument("empty variable name");
      if (!names.insert(v.name).second)
        throw std::invalid_argument("duplicate variable name: " + v.name);
      if (v.kind == VarKind::Categorical) {
        if (v.levels.empty())
          throw std::invalid_argument("categorical variable without levels: " + v.name);
        std::set<std::string> lv(v.levels.begin(), v.levels.end());
        if (lv.size() != v.levels.size())
          throw std::invalid_argument("duplicate levels in variable: " + v.name);
        for (const auto& mc : v.missing_codes)
          if (lv.count(mc))
            throw std::invalid_argument("missing code collides with level in " + v.name);
      } else if (!v.levels.empty()) {
        throw std::invalid_argument("continuous variable with levels: " + v.name);
      }
      if (v.role == VarRole::Stratum) ++n_stratum;
      if (v.role == VarRole::Weight) ++n_weight;
    }
    if (n_stratum > 1) throw std::invalid_argument("more than one stratum variable");
    if (n_weight > 1) throw std::invalid_argument("more than one weight variable");
  }

  std::vector<VariableDef> vars_;
};

}  // namespace synthlab
