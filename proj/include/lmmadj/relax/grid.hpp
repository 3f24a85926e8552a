#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/relax/model.hpp"

namespace lmmadj::relax {

enum class Boundary { Periodic, Clamp };

/// Aligned: every characteristic foot is a grid node (|v| dt / dx integer).
/// Linear: feet are linearly interpolated, first order in space.
enum class FootMode { Aligned, Linear };

inline Boundary parse_boundary(std::string_view s) {
  if (s == "periodic") return Boundary::Periodic;
  if (s == "clamp" || s == "zero-flux") return Boundary::Clamp;
  throw ConfigError("unknown boundary '" + std::string(s) + "' (expected periodic or clamp)");
}

inline FootMode parse_foot_mode(std::string_view s) {
  if (s == "aligned") return FootMode::Aligned;
  if (s == "linear") return FootMode::Linear;
  throw ConfigError("unknown foot mode '" + std::string(s) + "' (expected aligned or linear)");
}

/// Uniform nodes x_i = x_left + i dx, i = 0..nx-1, dx = (x_right - x_left)/(nx - 1).
/// With periodic boundaries node nx-1 coincides with node 0, so nx - 1 values
/// are stored; with clamped boundaries all nx.
struct LagrangianGrid {
  double x_left = 0.0;
  double x_right = 1.0;
  std::size_t nx = 2;
  double dt = 0.0;
  Boundary boundary = Boundary::Periodic;
  FootMode mode = FootMode::Aligned;

  [[nodiscard]] double dx() const { return (x_right - x_left) / static_cast<double>(nx - 1); }
  [[nodiscard]] std::size_t points() const {
    return boundary == Boundary::Periodic ? nx - 1 : nx;
  }
  [[nodiscard]] double x(std::size_t i) const { return x_left + static_cast<double>(i) * dx(); }
  /// Quadrature weight of stored node i (trapezoid rule on [x_left, x_right]).
  [[nodiscard]] double weight(std::size_t i) const {
    if (boundary == Boundary::Clamp && (i == 0 || i + 1 == nx)) return 0.5 * dx();
    return dx();
  }
  /// Foot displacement of one step in cells, v dt / dx.
  [[nodiscard]] double shift(double v) const { return v * dt / dx(); }

  /// Value of `f` at fractional node position `pos` under the boundary rule.
  [[nodiscard]] double sample(const std::vector<double>& f, double pos) const {
    const auto M = static_cast<std::ptrdiff_t>(points());
    auto at = [&](std::ptrdiff_t i) {
      if (boundary == Boundary::Periodic) {
        i %= M;
        if (i < 0) i += M;
      } else {
        i = i < 0 ? 0 : (i >= M ? M - 1 : i);
      }
      return f[static_cast<std::size_t>(i)];
    };
    const double fl = std::floor(pos);
    const auto i0 = static_cast<std::ptrdiff_t>(fl);
    const double w = pos - fl;
    if (w == 0.0) return at(i0);
    return (1.0 - w) * at(i0) + w * at(i0 + 1);
  }

  /// f(x_i - cells dx): the foot of a characteristic that moved `cells` cells.
  [[nodiscard]] double at_foot(const std::vector<double>& f, std::size_t i, double cells) const {
    double pos = static_cast<double>(i) - cells;
    if (mode == FootMode::Aligned) pos = std::round(pos);
    return sample(f, pos);
  }

  /// Adjoint of f -> at_foot(f, ., cells) in the weighted inner product
  /// sum_i w_i f_i g_i. Periodic aligned shifts reduce to reading lam at
  /// x_i + cells dx; clamped ends collect every foot that was clamped onto them.
  [[nodiscard]] std::vector<double> transpose_foot(const std::vector<double>& lam,
                                                   double cells) const {
    const auto M = static_cast<std::ptrdiff_t>(points());
    std::vector<double> out(lam.size(), 0.0);
    auto index = [&](std::ptrdiff_t i) {
      if (boundary == Boundary::Periodic) {
        i %= M;
        if (i < 0) i += M;
      } else {
        i = i < 0 ? 0 : (i >= M ? M - 1 : i);
      }
      return static_cast<std::size_t>(i);
    };
    for (std::ptrdiff_t i = 0; i < M; ++i) {
      double pos = static_cast<double>(i) - cells;
      if (mode == FootMode::Aligned) pos = std::round(pos);
      const double fl = std::floor(pos);
      const auto i0 = static_cast<std::ptrdiff_t>(fl);
      const double w = pos - fl;
      const auto src = static_cast<std::size_t>(i);
      const std::size_t k0 = index(i0);
      out[k0] += (weight(src) / weight(k0)) * ((1.0 - w) * lam[src]);
      if (w != 0.0) {
        const std::size_t k1 = index(i0 + 1);
        out[k1] += (weight(src) / weight(k1)) * (w * lam[src]);
      }
    }
    return out;
  }

  void validate(const RelaxationModel& model) const {
    if (!(x_right > x_left)) throw ConfigError("grid: need x_right > x_left");
    if (nx < 3) throw ConfigError("grid: need at least 3 points");
    if (!(dt > 0.0)) throw ConfigError("grid: dt must be positive");
    const double cfl = model.max_speed() * dt / dx();
    if (cfl > 1.0 + 1e-9) {
      throw ConfigError("grid: CFL violated, dt = " + std::to_string(dt) + " > dx / a = " +
                        std::to_string(dx() / model.max_speed()));
    }
    if (mode == FootMode::Aligned) {
      for (double v : model.velocities) {
        const double m = shift(v);
        if (std::abs(m - std::round(m)) > 1e-9) {
          throw ConfigError("grid: aligned mode needs v dt / dx integer, got " + std::to_string(m) +
                            " for v = " + std::to_string(v));
        }
      }
    }
  }
};

/// Grid with dt = dx / speed, so a two-velocity model with |v| = speed is aligned.
inline LagrangianGrid aligned_grid(double x_left, double x_right, std::size_t nx, double speed,
                                   Boundary boundary) {
  LagrangianGrid g{x_left, x_right, nx, 0.0, boundary, FootMode::Aligned};
  g.dt = g.dx() / speed;
  return g;
}

}  // namespace lmmadj::relax
