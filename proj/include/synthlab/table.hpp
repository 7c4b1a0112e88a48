#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "synthlab/schema.hpp"

namespace synthlab {

// One cell: for continuous columns `value` is the real; for categorical
// columns it is the level index. A cell with missing_code >= 0 is a missing
// marker (index into the variable's missing_codes) and `value` is ignored.
struct Cell {
  double value = 0.0;
  int missing_code = -1;

  bool is_missing() const { return missing_code >= 0; }

  static Cell missing(int code_index) {
    Cell c;
    c.missing_code = code_index;
    return c;
  }
  static Cell of(double v) {
    Cell c;
    c.value = v;
    return c;
  }

  bool operator==(const Cell& o) const {
    if (missing_code != o.missing_code) return false;
    return is_missing() || value == o.value;
  }
};

using Column = std::vector<Cell>;

class DataTable {
 public:
  DataTable() = default;
  DataTable(Schema schema, std::size_t n_rows)
      : schema_(std::move(schema)),
        n_rows_(n_rows),
        columns_(schema_.size(), Column(n_rows)) {}

  DataTable(Schema schema, std::vector<Column> columns)
      : schema_(std::move(schema)), columns_(std::move(columns)) {
    if (columns_.size() != schema_.size())
      throw std::invalid_argument("column count does not match schema");
    n_rows_ = columns_.empty() ? 0 : columns_[0].size();
    for (const auto& c : columns_)
      if (c.size() != n_rows_)
        throw std::invalid_argument("ragged columns");
    validate_cells();
  }

  const Schema& schema() const { return schema_; }
  std::size_t n_rows() const { return n_rows_; }

  const Column& column(std::size_t i) const { return columns_[i]; }
  Column& column(std::size_t i) { return columns_[i]; }
  const Column& column(const std::string& name) const {
    int i = schema_.index_of(name);
    if (i < 0) throw std::invalid_argument("unknown variable: " + name);
    return columns_[static_cast<std::size_t>(i)];
  }
  Column& column(const std::string& name) {
    int i = schema_.index_of(name);
    if (i < 0) throw std::invalid_argument("unknown variable: " + name);
    return columns_[static_cast<std::size_t>(i)];
  }

  const Cell& at(std::size_t row, std::size_t col) const {
    return columns_[col][row];
  }

  DataTable select_rows(const std::vector<std::size_t>& rows) const {
    DataTable out(schema_, rows.size());
    for (std::size_t c = 0; c < columns_.size(); ++c)
      for (std::size_t r = 0; r < rows.size(); ++r)
        out.columns_[c][r] = columns_[c][rows[r]];
    return out;
  }

  // Cell rendered back to its CSV token.
  std::string cell_text(std::size_t row, std::size_t col) const {
    const VariableDef& v = schema_.var(col);
    const Cell& c = columns_[col][row];
    if (c.is_missing()) return v.missing_codes[static_cast<std::size_t>(c.missing_code)];
    if (v.kind == VarKind::Categorical)
      return v.levels[static_cast<std::size_t>(c.value)];
    char buf[40];
    double d = c.value;
    if (d == std::floor(d) && std::fabs(d) < 1e15)
      std::snprintf(buf, sizeof(buf), "%.0f", d);
    else
      std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
  }

 private:
  void validate_cells() const {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      const VariableDef& v = schema_.var(c);
      for (std::size_t r = 0; r < n_rows_; ++r) {
        const Cell& cell = columns_[c][r];
        if (cell.is_missing()) {
          if (cell.missing_code >= static_cast<int>(v.missing_codes.size()))
            throw std::invalid_argument("invalid missing code in " + v.name);
          continue;
        }
        if (v.kind == VarKind::Categorical) {
          double idx = cell.value;
          if (idx != std::floor(idx) || idx < 0 ||
              idx >= static_cast<double>(v.levels.size()))
            throw std::invalid_argument("invalid level index in " + v.name);
        } else if (!std::isfinite(cell.value)) {
          throw std::invalid_argument("non-finite value in " + v.name);
        }
      }
    }
  }

  Schema schema_;
  std::size_t n_rows_ = 0;
  std::vector<Column> columns_;
};

}  // namespace synthlab
