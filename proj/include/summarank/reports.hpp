/* Copyright 2026 The summarank Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "summarank/errors.hpp"

namespace summarank {

/// How a numeric cell is rendered. Scores are stored on the [0, 1] scale and
/// shown multiplied by 100.
enum class CellFormat { text, score, pvalue, fraction, percent, count, real };

struct Cell {
  CellFormat format = CellFormat::text;
  std::string text;
  double value = 0.0;

  static Cell str(std::string s) { return {CellFormat::text, std::move(s), 0.0}; }
  static Cell score(double v) { return {CellFormat::score, {}, v}; }
  static Cell pvalue(double v) { return {CellFormat::pvalue, {}, v}; }
  static Cell fraction(double v) { return {CellFormat::fraction, {}, v}; }
  static Cell percent(double v) { return {CellFormat::percent, {}, v}; }
  static Cell count(double v) { return {CellFormat::count, {}, v}; }
  static Cell real(double v) { return {CellFormat::real, {}, v}; }
};

inline std::string format_cell(const Cell& c) {
  if (c.format == CellFormat::text) return c.text;
  require_finite(c.value, "report value");
  char buf[64];
  switch (c.format) {
    case CellFormat::score: std::snprintf(buf, sizeof buf, "%.2f", c.value * 100.0); break;
    case CellFormat::pvalue: std::snprintf(buf, sizeof buf, "%.4g", c.value); break;
    case CellFormat::fraction: std::snprintf(buf, sizeof buf, "%.4f", c.value); break;
    case CellFormat::percent: std::snprintf(buf, sizeof buf, "%.2f", c.value); break;
    case CellFormat::count: std::snprintf(buf, sizeof buf, "%.0f", c.value); break;
    default: std::snprintf(buf, sizeof buf, "%.6f", c.value); break;
  }
  return buf;
}

/// Same rounding as the text rendering, as a JSON value.
inline nlohmann::json cell_json(const Cell& c) {
  if (c.format == CellFormat::text) return c.text;
  const std::string s = format_cell(c);
  if (c.format == CellFormat::count) return static_cast<std::int64_t>(std::llround(c.value));
  return std::stod(s);
}

struct Report {
  std::string name;  // file stem
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;

  void add(std::vector<Cell> row) {
    require(row.size() == columns.size(), "report '" + name + "': row width does not match the header");
    rows.push_back(std::move(row));
  }

  /// Fixed-width table.
  std::string text() const {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) width[j] = columns[j].size();
    for (const auto& row : rows) {
      cells.emplace_back();
      for (std::size_t j = 0; j < row.size(); ++j) {
        cells.back().push_back(format_cell(row[j]));
        width[j] = std::max(width[j], cells.back().back().size());
      }
    }
    std::string out = "# " + title + "\n";
    for (const auto& note : notes) out += "# " + note + "\n";
    auto line = [&](const std::vector<std::string>& values) {
      std::string s;
      for (std::size_t j = 0; j < values.size(); ++j) {
        if (j) s += "  ";
        const bool left = j == 0;
        const std::string pad(width[j] - values[j].size(), ' ');
        s += left ? values[j] + pad : pad + values[j];
      }
      while (!s.empty() && s.back() == ' ') s.pop_back();
      return s + "\n";
    };
    out += line(columns);
    for (const auto& row : cells) out += line(row);
    return out;
  }

  /// One JSON record per row, plus one per note.
  std::string jsonl() const {
    std::string out;
    for (const auto& row : rows) {
      nlohmann::json rec{{"report", name}};
      for (std::size_t j = 0; j < columns.size(); ++j) rec[columns[j]] = cell_json(row[j]);
      out += rec.dump() + "\n";
    }
    for (const auto& note : notes) out += nlohmann::json{{"report", name}, {"note", note}}.dump() + "\n";
    return out;
  }
};

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Writes `<name>.txt` and `<name>.jsonl` into `dir`.
inline void write_report(const Report& report, const std::filesystem::path& dir) {
  const std::string text = report.text(), lines = report.jsonl();
  write_text_file(dir / (report.name + ".txt"), text);
  write_text_file(dir / (report.name + ".jsonl"), lines);
}

}  // namespace summarank
