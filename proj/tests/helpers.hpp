#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "synthlab/csv.hpp"
#include "synthlab/schema.hpp"
#include "synthlab/table.hpp"

namespace testutil {

inline synthlab::VariableDef cont(const std::string& name,
                                  std::vector<std::string> missing = {},
                                  synthlab::VarRole role = synthlab::VarRole::Synthesize) {
  synthlab::VariableDef v;
  v.name = name;
  v.kind = synthlab::VarKind::Continuous;
  v.missing_codes = std::move(missing);
  v.role = role;
  return v;
}

inline synthlab::VariableDef cat(const std::string& name,
                                 std::vector<std::string> levels,
                                 std::vector<std::string> missing = {},
                                 synthlab::VarRole role = synthlab::VarRole::Synthesize) {
  synthlab::VariableDef v;
  v.name = name;
  v.kind = synthlab::VarKind::Categorical;
  v.levels = std::move(levels);
  v.missing_codes = std::move(missing);
  v.role = role;
  return v;
}

inline synthlab::DataTable from_csv_text(const std::string& text,
                                         const synthlab::Schema& schema) {
  std::istringstream in(text);
  return synthlab::parse_csv(in, schema, "<inline>");
}

inline std::string to_csv_text(const synthlab::DataTable& t,
                               const std::string& label = "") {
  std::ostringstream out;
  synthlab::write_csv(t, out, label);
  return out.str();
}

}  // namespace testutil
