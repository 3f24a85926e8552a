#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/lmm/bootstrap.hpp"
#include "lmmadj/lmm/history.hpp"
#include "lmmadj/lmm/step.hpp"
#include "lmmadj/lmm/tableau.hpp"
#include "lmmadj/ode/problem.hpp"

namespace lmmadj::ode {

namespace detail {

/// Cubic Lagrange interpolation of grid samples (layout of Trajectory::controls).
template <class Scalar>
Scalar interpolate_samples(const std::vector<Scalar>& samples, const lmm::TimeGrid<Scalar>& grid,
                           std::size_t stages, Scalar t) {
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(samples.size());
  if (count == 1) return samples.front();
  const Scalar pos = (t - grid.t0()) / grid.dt() + static_cast<Scalar>(stages) - Scalar(1);
  const std::ptrdiff_t width = std::min<std::ptrdiff_t>(4, count);
  std::ptrdiff_t first =
      static_cast<std::ptrdiff_t>(std::floor(static_cast<double>(pos))) - (width / 2 - 1);
  first = std::clamp<std::ptrdiff_t>(first, 0, count - width);
  Scalar value{0};
  for (std::ptrdiff_t i = first; i < first + width; ++i) {
    Scalar w{1};
    for (std::ptrdiff_t k = first; k < first + width; ++k) {
      if (k != i) w *= (pos - static_cast<Scalar>(k)) / static_cast<Scalar>(i - k);
    }
    value += w * samples[static_cast<std::size_t>(i)];
  }
  return value;
}

}  // namespace detail

template <class Scalar>
struct ForwardOptions {
  lmm::InitMode init = lmm::InitMode::Exact;
  lmm::ImplicitSolveOptions<Scalar> solver{};
  bool use_jacobian = true;
};

/// Integrates y' = f(y, u, t) with the multistep scheme. `controls` holds
/// u_n for n = 1-s..N.
template <class Scalar>
Trajectory<Scalar> solve_forward(const OdeControlProblem<Scalar>& problem,
                                 const lmm::MultistepTableau<Scalar>& tab,
                                 const lmm::TimeGrid<Scalar>& grid, std::vector<Scalar> controls,
                                 const ForwardOptions<Scalar>& opts = {}) {
  problem.validate();
  const std::size_t s = tab.stages();
  if (controls.size() != Trajectory<Scalar>::length(grid, s)) {
    throw ConfigError("solve_forward: expected " +
                      std::to_string(Trajectory<Scalar>::length(grid, s)) +
                      " control values (N + s), got " + std::to_string(controls.size()));
  }
  Trajectory<Scalar> tr{grid, s, std::vector<Scalar>(controls.size()), std::move(controls)};

  auto rhs_continuous = [&](Scalar y, Scalar t) {
    return problem.f(y, detail::interpolate_samples(tr.controls, grid, s, t), t);
  };
  const auto initial =
      lmm::bootstrap_states(s, grid, problem.y0, rhs_continuous, opts.init, problem.y_exact);

  lmm::History<Scalar> hist(s);
  for (std::size_t i = 0; i < s; ++i) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(i) + 1 - static_cast<std::ptrdiff_t>(s);
    tr.states[i] = initial[i];
    hist.push(initial[i], problem.f(initial[i], tr.u(n), tr.t(n)));
  }

  const Scalar dt = grid.dt();
  for (std::ptrdiff_t n = 0; n < tr.last(); ++n) {
    const Scalar u_next = tr.u(n + 1);
    auto rhs = [&](Scalar y, Scalar t) { return problem.f(y, u_next, t); };
    Scalar y_next;
    if (opts.use_jacobian) {
      auto jac = [&](Scalar y, Scalar t) { return problem.f_y(y, u_next, t); };
      y_next = lmm::step(tab, hist, dt, tr.t(n + 1), rhs, jac, opts.solver, n + 1);
    } else {
      y_next = lmm::step(tab, hist, dt, tr.t(n + 1), rhs, lmm::NoJacobian{}, opts.solver, n + 1);
    }
    if (!std::isfinite(static_cast<double>(y_next))) {
      throw SolverError("forward solve blew up at step " + std::to_string(n + 1), n + 1);
    }
    tr.states[tr.index(n + 1)] = y_next;
    hist.push(y_next, problem.f(y_next, u_next, tr.t(n + 1)));
  }
  return tr;
}

}  // namespace lmmadj::ode
