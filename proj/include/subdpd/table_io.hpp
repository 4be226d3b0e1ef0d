// Copyright 2026 The subdpd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "subdpd/errors.hpp"

namespace subdpd {

/// Formats a double so that parsing it back is exact and output is
/// byte-stable across runs.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Delimited text table: '#' metadata lines (key = value), one header row,
/// comma-separated numeric rows. Used for PSD, history and sweep exports.
struct TextTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_table(const std::string& path, const TextTable& table) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write table: " + path);
  for (const auto& [k, v] : table.metadata) out << "# " << k << " = " << v << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << format_double(row[c]);
    out << "\n";
  }
}

inline TextTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table: " + path);
  TextTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string k = line.substr(1, eq - 1);
        std::string v = line.substr(eq + 1);
        const auto trim = [](std::string& s) {
          const auto b = s.find_first_not_of(" \t");
          const auto e = s.find_last_not_of(" \t\r");
          s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        trim(k);
        trim(v);
        table.metadata.emplace_back(k, v);
      }
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        table.columns.push_back(cell);
      }
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.columns.size())
      throw ConfigError(path + ": row width does not match header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Ordered key/value document used for scenario configs and the metrics
/// summary. Writing and re-parsing reproduces the map exactly.
struct KeyValueDoc {
  std::vector<std::pair<std::string, std::string>> entries;

  bool has(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return true;
    return false;
  }
  const std::string& get(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return v;
    throw ConfigError("missing key: " + key);
  }
  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries) {
      if (k == key) {
        v = value;
        return;
      }
    }
    entries.emplace_back(key, value);
  }
  void set(const std::string& key, double value) { set(key, format_double(value)); }

  bool operator==(const KeyValueDoc&) const = default;
};

inline void write_keyvalue(const std::string& path, const KeyValueDoc& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  for (const auto& [k, v] : doc.entries) out << k << " = " << v << "\n";
}

inline KeyValueDoc parse_keyvalue_text(std::istream& in, const std::string& name) {
  KeyValueDoc doc;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    std::string work = line;
    trim(work);
    if (work.empty()) continue;
    const auto eq = work.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    std::string k = work.substr(0, eq);
    std::string v = work.substr(eq + 1);
    trim(k);
    trim(v);
    if (k.empty())
      throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
    if (doc.has(k))
      throw ConfigError(name + ":" + std::to_string(line_no) +
                        ": duplicate key '" + k + "'");
    doc.entries.emplace_back(k, v);
  }
  return doc;
}

inline KeyValueDoc read_keyvalue(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  return parse_keyvalue_text(in, path);
}

}  // namespace subdpd
