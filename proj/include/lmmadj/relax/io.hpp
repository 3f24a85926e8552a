#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/relax/grid.hpp"
#include "lmmadj/relax/model.hpp"
#include "lmmadj/relax/solver.hpp"

namespace lmmadj::relax {

inline std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  return out;
}

/// Writes columns x, <component names...> for all nx nodes; with periodic
/// boundaries the last node repeats the first.
inline void write_snapshot(const std::filesystem::path& path, const LagrangianGrid& grid,
                           const std::vector<std::string>& names, const Macro& values) {
  auto out = open_csv(path);
  out << "x";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  const std::size_t M = grid.points();
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const std::size_t k = i < M ? i : i - M;
    out << grid.x(i);
    for (const auto& comp : values) out << ',' << comp[k];
    out << '\n';
  }
}

/// `<dir>/<run>_t<index>.csv`
inline std::filesystem::path snapshot_path(const std::filesystem::path& dir, const std::string& run,
                                           std::size_t index) {
  return dir / (run + "_t" + std::to_string(index) + ".csv");
}

}  // namespace lmmadj::relax
