#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/lmm/history.hpp"
#include "lmmadj/lmm/tableau.hpp"
#include "lmmadj/lmm/time_grid.hpp"

namespace lmmadj::lmm {

enum class InitMode {
  Exact,        // sample an exact solution at the pre-initial grid times
  RkBootstrap,  // integrate backward from y0 with classical RK4
};

/// One classical RK4 step of size h (may be negative).
template <class Scalar, class Rhs>
Scalar rk4_step(Rhs&& rhs, Scalar y, Scalar t, Scalar h) {
  const Scalar half = h / Scalar(2);
  const Scalar k1 = rhs(y, t);
  const Scalar k2 = rhs(y + half * k1, t + half);
  const Scalar k3 = rhs(y + half * k2, t + half);
  const Scalar k4 = rhs(y + h * k3, t + h);
  return y + h / Scalar(6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
}

/// States y_{1-s}, ..., y_0 (oldest first) at times t0 + (1-s+i) dt.
/// The newest entry is always y0.
template <class Scalar, class Rhs>
std::vector<Scalar> bootstrap_states(std::size_t stages, const TimeGrid<Scalar>& grid, Scalar y0,
                                     Rhs&& rhs, InitMode mode,
                                     const std::function<Scalar(Scalar)>& exact = {},
                                     int rk_substeps = 4) {
  std::vector<Scalar> out(stages);
  out.back() = y0;
  if (stages == 1) return out;
  if (mode == InitMode::Exact) {
    if (!exact) throw ConfigError("exact history initialization requested without exact solution");
    for (std::size_t i = 0; i + 1 < stages; ++i) {
      out[i] = exact(grid.time(static_cast<std::ptrdiff_t>(i) + 1 - static_cast<std::ptrdiff_t>(stages)));
    }
    return out;
  }
  const Scalar h = -grid.dt() / static_cast<Scalar>(rk_substeps);
  Scalar y = y0;
  Scalar t = grid.t0();
  for (std::size_t k = 1; k < stages; ++k) {
    for (int sub = 0; sub < rk_substeps; ++sub) {
      y = rk4_step(rhs, y, t, h);
      t = grid.time(-static_cast<std::ptrdiff_t>(k) + 1) +
          static_cast<Scalar>(sub + 1) * h;
    }
    t = grid.time(-static_cast<std::ptrdiff_t>(k));
    out[stages - 1 - k] = y;
  }
  return out;
}

/// Warm history for `tab` with right-hand-side values evaluated as rhs(y_n, t_n).
template <class Scalar, class Rhs>
History<Scalar> bootstrap_history(const MultistepTableau<Scalar>& tab,
                                  const TimeGrid<Scalar>& grid, Scalar y0, Rhs&& rhs,
                                  InitMode mode,
                                  const std::function<Scalar(Scalar)>& exact = {}) {
  const std::size_t s = tab.stages();
  const auto states = bootstrap_states(s, grid, y0, rhs, mode, exact);
  History<Scalar> hist(s);
  for (std::size_t i = 0; i < s; ++i) {
    const Scalar t = grid.time(static_cast<std::ptrdiff_t>(i) + 1 - static_cast<std::ptrdiff_t>(s));
    hist.push(states[i], rhs(states[i], t));
  }
  return hist;
}

}  // namespace lmmadj::lmm
