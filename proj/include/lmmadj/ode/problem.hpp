#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/lmm/time_grid.hpp"

namespace lmmadj::ode {

/// Scalar optimal-control problem
///   min j(y(T)) + alpha/2 * int u^2   s.t.   y' = f(y, u, t),  y(t0) = y0.
template <class Scalar>
struct OdeControlProblem {
  using Fn3 = std::function<Scalar(Scalar, Scalar, Scalar)>;
  using Fn1 = std::function<Scalar(Scalar)>;

  Fn3 f;
  Fn3 f_y;
  Fn3 f_u;
  Fn1 j;
  Fn1 j_y;
  Scalar alpha{0};
  Scalar y0{0};
  Fn1 y_exact;  // optional
  Fn1 p_exact;  // optional

  void validate() const {
    if (!f || !f_y || !f_u) throw ConfigError("ode problem: f, f_y and f_u are required");
    if (!j || !j_y) throw ConfigError("ode problem: j and j_y are required");
    if (alpha < Scalar(0)) throw ConfigError("ode problem: alpha must be non-negative");
  }
};

enum class AdjointRoute { DiscretizeThenOptimize, OptimizeThenDiscretize };

inline std::string to_string(AdjointRoute r) {
  return r == AdjointRoute::DiscretizeThenOptimize ? "dto" : "otd";
}

/// States and controls on n = 1-s, ..., N. Storage index k = n + s - 1.
template <class Scalar>
struct Trajectory {
  lmm::TimeGrid<Scalar> grid;
  std::size_t stages;
  std::vector<Scalar> states;
  std::vector<Scalar> controls;

  [[nodiscard]] static std::size_t length(const lmm::TimeGrid<Scalar>& g, std::size_t s) {
    return g.steps() + s;
  }
  [[nodiscard]] std::size_t index(std::ptrdiff_t n) const {
    return static_cast<std::size_t>(n + static_cast<std::ptrdiff_t>(stages) - 1);
  }
  [[nodiscard]] Scalar y(std::ptrdiff_t n) const { return states[index(n)]; }
  [[nodiscard]] Scalar u(std::ptrdiff_t n) const { return controls[index(n)]; }
  [[nodiscard]] Scalar t(std::ptrdiff_t n) const { return grid.time(n); }
  [[nodiscard]] std::ptrdiff_t last() const { return static_cast<std::ptrdiff_t>(grid.steps()); }
};

/// Multipliers p_0, ..., p_N.
template <class Scalar>
struct AdjointTrajectory {
  lmm::TimeGrid<Scalar> grid;
  AdjointRoute route;
  std::vector<Scalar> p;
};

/// Control samples u(t_n) for n = 1-s..N, laid out like Trajectory::controls.
template <class Scalar, class Fn>
std::vector<Scalar> sample_controls(const lmm::TimeGrid<Scalar>& grid, std::size_t stages,
                                    Fn&& u_of_t) {
  std::vector<Scalar> out(Trajectory<Scalar>::length(grid, stages));
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = u_of_t(grid.time(static_cast<std::ptrdiff_t>(k) + 1 -
                              static_cast<std::ptrdiff_t>(stages)));
  }
  return out;
}

/// Trajectory whose states are given analytically rather than integrated.
template <class Scalar, class YFn, class UFn>
Trajectory<Scalar> prescribed_trajectory(const lmm::TimeGrid<Scalar>& grid, std::size_t stages,
                                         YFn&& y_of_t, UFn&& u_of_t) {
  Trajectory<Scalar> tr{grid, stages, sample_controls(grid, stages, y_of_t),
                        sample_controls(grid, stages, u_of_t)};
  return tr;
}

}  // namespace lmmadj::ode
