#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthlab/table.hpp"

namespace synthlab {
namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  out.push_back(field);
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline DataTable parse_csv(std::istream& in, const Schema& schema,
                           const std::string& origin = "<stream>") {
  std::string line;
  std::size_t line_no = 0;

  // header (comment lines, e.g. a faux-data label, are skipped)
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    header = detail::split_csv_line(line);
    break;
  }
  if (header.empty())
    throw std::runtime_error(origin + ": empty file or missing header");

  // header is order-insensitive; extra columns are rejected except for the
  // faux-data label column our own writer appends
  std::vector<int> col_to_var(header.size(), -1);
  std::vector<bool> seen(schema.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "faux_label" && schema.index_of("faux_label") < 0) continue;
    int v = schema.index_of(header[c]);
    if (v < 0)
      throw std::runtime_error(origin + ": unknown column '" + header[c] + "'");
    col_to_var[c] = v;
    seen[static_cast<std::size_t>(v)] = true;
  }
  for (std::size_t v = 0; v < schema.size(); ++v)
    if (!seen[v])
      throw std::runtime_error(origin + ": missing column '" + schema.var(v).name + "'");

  std::vector<Column> columns(schema.size());
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    ++n_rows;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (col_to_var[c] < 0) continue;
      const auto vi = static_cast<std::size_t>(col_to_var[c]);
      const VariableDef& v = schema.var(vi);
      const std::string& tok = fields[c];
      int mc = v.missing_code_index(tok);
      if (mc >= 0) {
        columns[vi].push_back(Cell::missing(mc));
        continue;
      }
      if (v.kind == VarKind::Categorical) {
        int idx = v.level_index(tok);
        if (idx < 0)
          throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                   ": value '" + tok + "' not a level of " + v.name);
        columns[vi].push_back(Cell::of(idx));
      } else {
        double d;
        if (!detail::parse_double(tok, d))
          throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                   ": cannot parse '" + tok + "' in column " + v.name);
        // numeric missing codes may be written in any format
        bool matched = false;
        for (std::size_t m = 0; m < v.missing_codes.size(); ++m) {
          double code;
          if (detail::parse_double(v.missing_codes[m], code) && code == d) {
            columns[vi].push_back(Cell::missing(static_cast<int>(m)));
            matched = true;
            break;
          }
        }
        if (!matched) columns[vi].push_back(Cell::of(d));
      }
    }
  }
  (void)n_rows;
  return DataTable(schema, std::move(columns));
}

inline DataTable parse_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return parse_csv(in, schema, path);
}

// When `label` is nonempty a comment line carrying it is written first and a
// constant label column is appended.
inline void write_csv(const DataTable& table, std::ostream& out,
                      const std::string& label = "") {
  const Schema& s = table.schema();
  if (!label.empty()) out << "# " << label << "\n";
  for (std::size_t c = 0; c < s.size(); ++c) {
    if (c) out << ',';
    out << detail::csv_quote(s.var(c).name);
  }
  if (!label.empty()) out << ",faux_label";
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (c) out << ',';
      out << detail::csv_quote(table.cell_text(r, c));
    }
    if (!label.empty()) out << ',' << detail::csv_quote(label);
    out << '\n';
  }
}

inline void write_csv(const DataTable& table, const std::string& path,
                      const std::string& label = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  write_csv(table, out, label);
}

}  // namespace synthlab
