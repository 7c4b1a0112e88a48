#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "synthlab/table.hpp"

namespace synthlab {

enum class DesignColKind { Intercept, Continuous, Dummy, MissingIndicator };

struct DesignColumn {
  DesignColKind kind = DesignColKind::Intercept;
  int var_index = -1;  // index into the source schema
  int level = -1;      // dummy columns: encoded level id
  std::string name;
};

// Intercept + continuous values + dummy-coded categoricals (reference level
// dropped) + missingness indicators for continuous predictors with declared
// missing codes. Categorical missing markers become an extra trailing level.
struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<DesignColumn> cols;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index columns() const { return X.cols(); }
};

// Number of encoded levels for a categorical variable: declared levels plus
// one pseudo-level when missing codes are declared.
inline int encoded_levels(const VariableDef& v) {
  return static_cast<int>(v.levels.size()) + (v.has_missing_codes() ? 1 : 0);
}

// Level id of a categorical cell under missing-as-category coding.
inline int encoded_level(const VariableDef& v, const Cell& c) {
  if (c.is_missing()) return static_cast<int>(v.levels.size());
  return static_cast<int>(c.value);
}

inline DesignMatrix encode_design(const DataTable& table,
                                  const std::vector<std::string>& predictors) {
  const Schema& s = table.schema();
  const std::size_t n = table.n_rows();

  std::vector<DesignColumn> cols;
  cols.push_back({DesignColKind::Intercept, -1, -1, "(intercept)"});
  for (const auto& name : predictors) {
    int vi = s.index_of(name);
    if (vi < 0) throw std::invalid_argument("unknown predictor: " + name);
    const VariableDef& v = s.var(static_cast<std::size_t>(vi));
    if (v.kind == VarKind::Continuous) {
      cols.push_back({DesignColKind::Continuous, vi, -1, name});
      if (v.has_missing_codes())
        cols.push_back({DesignColKind::MissingIndicator, vi, -1, name + ".miss"});
    } else {
      int L = encoded_levels(v);
      for (int l = 1; l < L; ++l) {
        std::string lev = l < static_cast<int>(v.levels.size())
                              ? v.levels[static_cast<std::size_t>(l)]
                              : std::string("<missing>");
        cols.push_back({DesignColKind::Dummy, vi, l, name + "." + lev});
      }
    }
  }

  DesignMatrix dm;
  dm.cols = cols;
  dm.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                               static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const DesignColumn& dc = cols[j];
    auto col = dm.X.col(static_cast<Eigen::Index>(j));
    switch (dc.kind) {
      case DesignColKind::Intercept:
        col.setOnes();
        break;
      case DesignColKind::Continuous: {
        const Column& src = table.column(static_cast<std::size_t>(dc.var_index));
        double sum = 0.0;
        std::size_t cnt = 0;
        for (const Cell& c : src)
          if (!c.is_missing()) {
            sum += c.value;
            ++cnt;
          }
        double mean = cnt ? sum / static_cast<double>(cnt) : 0.0;
        for (std::size_t r = 0; r < n; ++r)
          col(static_cast<Eigen::Index>(r)) =
              src[r].is_missing() ? mean : src[r].value;
        break;
      }
      case DesignColKind::MissingIndicator: {
        const Column& src = table.column(static_cast<std::size_t>(dc.var_index));
        for (std::size_t r = 0; r < n; ++r)
          col(static_cast<Eigen::Index>(r)) = src[r].is_missing() ? 1.0 : 0.0;
        break;
      }
      case DesignColKind::Dummy: {
        const VariableDef& v = s.var(static_cast<std::size_t>(dc.var_index));
        const Column& src = table.column(static_cast<std::size_t>(dc.var_index));
        for (std::size_t r = 0; r < n; ++r)
          col(static_cast<Eigen::Index>(r)) =
              encoded_level(v, src[r]) == dc.level ? 1.0 : 0.0;
        break;
      }
    }
  }
  return dm;
}

struct MissingnessSplit {
  std::vector<int> indicator;  // 1 where missing
  DataTable observed_subtable;
};

inline MissingnessSplit split_missingness(const DataTable& table,
                                          const std::string& var) {
  const VariableDef& v = table.schema().var(var);
  if (!v.has_missing_codes())
    throw std::invalid_argument("variable has no missing codes declared: " + var);
  const Column& col = table.column(var);
  MissingnessSplit out;
  out.indicator.resize(table.n_rows());
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    out.indicator[r] = col[r].is_missing() ? 1 : 0;
    if (!col[r].is_missing()) keep.push_back(r);
  }
  out.observed_subtable = table.select_rows(keep);
  return out;
}

}  // namespace synthlab
