#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace csikd {

// Round-trip-safe float text: 17 significant digits.
inline std::string csv_f64(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Two-decimal display form used in the markdown summaries.
inline std::string md_f64(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "n/a";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != header.size())
      throw std::invalid_argument("csv row width mismatch");
    rows.push_back(std::move(row));
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    auto emit = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ",";
        out << cells[i];
      }
      out << "\n";
    };
    emit(header);
    for (const auto& r : rows) emit(r);
  }

  static CsvTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read csv: " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (line.back() == ',') cells.push_back("");
      if (first) {
        t.header = std::move(cells);
        first = false;
      } else {
        t.rows.push_back(std::move(cells));
      }
    }
    return t;
  }
};

// Markdown table writer for the human-readable summary.
class MarkdownWriter {
public:
  explicit MarkdownWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write markdown: " + path);
  }

  void heading(const std::string& text, int level = 2) {
    out_ << std::string(static_cast<std::size_t>(level), '#') << " " << text << "\n\n";
  }

  void paragraph(const std::string& text) { out_ << text << "\n\n"; }

  void table(const std::vector<std::string>& header,
             const std::vector<std::vector<std::string>>& rows) {
    auto emit = [this](const std::vector<std::string>& cells) {
      out_ << "|";
      for (const auto& c : cells) out_ << " " << c << " |";
      out_ << "\n";
    };
    emit(header);
    out_ << "|";
    for (std::size_t i = 0; i < header.size(); ++i) out_ << " --- |";
    out_ << "\n";
    for (const auto& r : rows) emit(r);
    out_ << "\n";
  }

private:
  std::ofstream out_;
};

}  // namespace csikd
