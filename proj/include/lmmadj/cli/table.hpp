#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "lmmadj/relax/io.hpp"

namespace lmmadj::cli {

/// Numeric table; NaN cells are written empty.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    throw Error("table has no column '" + name + "'");
  }
  [[nodiscard]] double at(std::size_t row, const std::string& name) const {
    return rows.at(row).at(column(name));
  }
};

inline void write_csv(const std::filesystem::path& path, const Table& t) {
  auto out = relax::open_csv(path);
  for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (!std::isnan(row[c])) out << row[c];
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

/// Aligned columns: integers as-is, rates fixed, everything else scientific.
inline void print_table(std::ostream& os, const std::string& title, const Table& t) {
  constexpr int width = 15;
  os << title << '\n';
  std::string rule;
  for (const auto& h : t.header) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%*s", width, h.c_str());
    os << buf;
    rule += std::string(width, '-');
  }
  os << '\n' << rule << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      char buf[64];
      const double v = row[c];
      const std::string& h = t.header[c];
      if (std::isnan(v)) {
        std::snprintf(buf, sizeof buf, "%*s", width, "-");
      } else if (h == "N" || h == "nx" || h.rfind("steps", 0) == 0 || h == "k" ||
                 h == "self_reference") {
        std::snprintf(buf, sizeof buf, "%*.0f", width, v);
      } else if (h.find("rate") != std::string::npos) {
        std::snprintf(buf, sizeof buf, "%*.5f", width, v);
      } else {
        std::snprintf(buf, sizeof buf, "%*.5e", width, v);
      }
      os << buf;
    }
    os << '\n';
  }
  os << '\n';
}

}  // namespace lmmadj::cli
