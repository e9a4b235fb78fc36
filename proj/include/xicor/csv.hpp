// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xicor/errors.hpp"
#include "xicor/kernels.hpp"

namespace xicor {

/// Comma-separated numeric table with a header row.
struct CsvTable {
  std::vector<std::string> headers;
  std::vector<std::vector<double>> columns;
  std::size_t n_rows = 0;

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < headers.size(); ++i) {
      if (headers[i] == name) return i;
    }
    return std::nullopt;
  }

  const std::vector<double>& column(std::string_view name) const {
    const auto idx = find(name);
    if (!idx) throw_usage("no column named '" + std::string(name) + "'");
    return columns[*idx];
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

}  // namespace detail

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (line_no == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (view.empty()) continue;
    const auto cells = detail::split_commas(view);
    if (!have_header) {
      for (auto c : cells) table.headers.push_back(detail::unquote(c));
      table.columns.resize(table.headers.size());
      have_header = true;
      continue;
    }
    if (cells.size() != table.headers.size()) {
      throw_usage("line " + std::to_string(line_no) + ": expected " +
                  std::to_string(table.headers.size()) + " fields, found " +
                  std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto value = detail::parse_real(cells[c]);
      if (!value || !std::isfinite(*value)) {
        throw_usage("line " + std::to_string(line_no) + ", column '" + table.headers[c] +
                    "': not a finite number: '" + std::string(cells[c]) + "'");
      }
      table.columns[c].push_back(*value);
    }
    ++table.n_rows;
  }
  if (!have_header) throw_usage("empty CSV input");
  return table;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_usage("cannot open '" + path + "'");
  return read_csv(in);
}

/// Writes columns with shortest round-trip formatting, so re-reading is exact.
inline void write_csv(std::ostream& out, const std::vector<std::string>& headers,
                      const std::vector<std::span<const double>>& columns) {
  for (std::size_t c = 0; c < headers.size(); ++c) out << (c ? "," : "") << headers[c];
  out << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << (c ? "," : "") << detail::format_number(columns[c][r]);
    }
    out << "\n";
  }
}

}  // namespace xicor
