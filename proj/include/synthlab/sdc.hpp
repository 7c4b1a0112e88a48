#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/engine.hpp"
#include "synthlab/table.hpp"

namespace synthlab {

struct TopcodeBounds {
  std::optional<double> lower;
  std::optional<double> upper;
};

struct SdcPolicy {
  std::string label_text = "FALSE DATA";
  std::vector<std::string> key_variables;
  std::map<std::string, TopcodeBounds> topcode;
};

namespace detail {

// key tuple rendered as text so missing markers compare exactly
inline std::string key_of(const DataTable& t, std::size_t row,
                          const std::vector<int>& key_cols) {
  std::string key;
  for (int c : key_cols) {
    key += t.cell_text(row, static_cast<std::size_t>(c));
    key += '\x1f';
  }
  return key;
}

inline std::vector<int> key_columns(const Schema& s,
                                    const std::vector<std::string>& keys) {
  if (keys.empty()) throw std::invalid_argument("empty key variable list");
  std::vector<int> out;
  for (const auto& k : keys) {
    int i = s.index_of(k);
    if (i < 0) throw std::invalid_argument("unknown key variable: " + k);
    out.push_back(i);
  }
  return out;
}

}  // namespace detail

struct RemovalReport {
  std::size_t removed = 0;
};

// Drops synthetic rows whose key tuple is unique in the observed data and
// also unique in the synthetic data.
inline DataTable remove_replicated_uniques(const DataTable& observed,
                                           const DataTable& synthetic,
                                           const std::vector<std::string>& keys,
                                           RemovalReport* report = nullptr) {
  std::vector<int> obs_cols = detail::key_columns(observed.schema(), keys);
  std::vector<int> syn_cols = detail::key_columns(synthetic.schema(), keys);

  std::map<std::string, int> obs_count, syn_count;
  for (std::size_t r = 0; r < observed.n_rows(); ++r)
    ++obs_count[detail::key_of(observed, r, obs_cols)];
  std::vector<std::string> syn_keys(synthetic.n_rows());
  for (std::size_t r = 0; r < synthetic.n_rows(); ++r) {
    syn_keys[r] = detail::key_of(synthetic, r, syn_cols);
    ++syn_count[syn_keys[r]];
  }

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < synthetic.n_rows(); ++r) {
    auto it = obs_count.find(syn_keys[r]);
    bool replicated_unique =
        it != obs_count.end() && it->second == 1 && syn_count[syn_keys[r]] == 1;
    if (!replicated_unique) keep.push_back(r);
  }
  if (report) report->removed = synthetic.n_rows() - keep.size();
  return synthetic.select_rows(keep);
}

// Clamps continuous values into the configured bounds; missing markers pass
// through untouched.
inline DataTable top_bottom_code(const DataTable& table, const SdcPolicy& policy,
                                 std::size_t* modified = nullptr) {
  const Schema& s = table.schema();
  std::size_t count = 0;
  std::vector<Column> cols;
  for (std::size_t c = 0; c < s.size(); ++c) cols.push_back(table.column(c));
  for (const auto& [name, bounds] : policy.topcode) {
    int i = s.index_of(name);
    if (i < 0) throw std::invalid_argument("unknown top-code variable: " + name);
    const VariableDef& v = s.var(static_cast<std::size_t>(i));
    if (v.kind != VarKind::Continuous)
      throw std::invalid_argument("top-coding requires a continuous variable: " + name);
    if ((bounds.lower && !std::isfinite(*bounds.lower)) ||
        (bounds.upper && !std::isfinite(*bounds.upper)))
      throw std::invalid_argument("non-finite top-code bound for " + name);
    for (Cell& cell : cols[static_cast<std::size_t>(i)]) {
      if (cell.is_missing()) continue;
      if (bounds.upper && cell.value > *bounds.upper) {
        cell.value = *bounds.upper;
        ++count;
      } else if (bounds.lower && cell.value < *bounds.lower) {
        cell.value = *bounds.lower;
        ++count;
      }
    }
  }
  if (modified) *modified = count;
  return DataTable(s, std::move(cols));
}

// Marks the output as synthetic; write_csv emits the label as a leading
// comment and appends a constant label column.
inline SynthesisOutput label_faux(SynthesisOutput output,
                                  const std::string& text = "FALSE DATA") {
  output.manifest.labelled = true;
  output.manifest.label_text = text;
  return output;
}

}  // namespace synthlab
