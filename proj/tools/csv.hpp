#pragma once

#include <fmt/format.h>

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ambres::cli {

using Cell = std::variant<std::string, double, std::int64_t, bool>;

inline std::string format_cell(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return fmt::format("{:.12g}", *d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return fmt::format("{}", *i);
  return std::get<bool>(c) ? "1" : "0";
}

// Comment lines "# key: value" followed by a header row and data rows.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<Cell> row) { rows_.push_back(std::move(row)); }
  std::size_t size() const { return rows_.size(); }

  void write(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& provenance) const {
    for (const auto& [k, v] : provenance) out << "# " << k << ": " << v << '\n';
    write_row(out, columns_);
    for (const auto& row : rows_) {
      std::vector<std::string> cells;
      for (const Cell& c : row) cells.push_back(format_cell(c));
      write_row(out, cells);
    }
  }

 private:
  static void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace ambres::cli
