#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>

#include "lmmadj/errors.hpp"
#include "lmmadj/lmm/history.hpp"
#include "lmmadj/lmm/tableau.hpp"

namespace lmmadj::lmm {

template <class Scalar>
struct ImplicitSolveOptions {
  Scalar tolerance = Scalar(1e-12);  // absolute, on the step residual
  int max_iterations = 50;
};

/// Tag for "no analytic Jacobian": implicit steps fall back to fixed-point iteration.
struct NoJacobian {};

/// Explicit part of the recurrence, -a^T Y_n + dt * sum_{l>=0} b_l f_{n-l}.
template <class Scalar>
Scalar explicit_part(const MultistepTableau<Scalar>& tab, const History<Scalar>& hist, Scalar dt) {
  Scalar lin{0};
  Scalar src{0};
  for (std::size_t l = 0; l < tab.stages(); ++l) {
    lin -= tab.a(l) * hist.state(l);
    src += tab.b(static_cast<int>(l)) * hist.rhs(l);
  }
  return lin + dt * src;
}

/// Solves y = known + h * rhs(y). Newton with backtracking when a Jacobian is
/// supplied, plain fixed-point iteration otherwise.
template <class Scalar, class Rhs, class Jac>
Scalar solve_implicit(Scalar known, Scalar h, Scalar guess, Rhs&& rhs, Jac&& jac,
                      const ImplicitSolveOptions<Scalar>& opts, std::ptrdiff_t step_index) {
  using std::abs;
  auto residual = [&](Scalar y) { return y - known - h * rhs(y); };
  Scalar y = guess;
  Scalar r = residual(y);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (!std::isfinite(static_cast<double>(r))) break;
    if (abs(r) <= opts.tolerance) {
      // One extra Newton correction: quadratic convergence takes the
      // accepted iterate to roundoff, so the tolerance does not accumulate
      // over long convergence runs.
      if constexpr (!std::is_same_v<std::decay_t<Jac>, NoJacobian>) {
        const Scalar dg = Scalar(1) - h * jac(y);
        const Scalar y_pol = y - r / dg;
        if (dg != Scalar(0) && std::isfinite(static_cast<double>(y_pol))) y = y_pol;
      }
      return y;
    }
    if constexpr (std::is_same_v<std::decay_t<Jac>, NoJacobian>) {
      y = known + h * rhs(y);
      r = residual(y);
    } else {
      const Scalar dg = Scalar(1) - h * jac(y);
      if (dg == Scalar(0)) break;
      const Scalar delta = -r / dg;
      Scalar lambda{1};
      Scalar y_try = y + delta;
      Scalar r_try = residual(y_try);
      while (!(abs(r_try) < abs(r)) && lambda > Scalar(1) / Scalar(1024)) {
        lambda /= Scalar(2);
        y_try = y + lambda * delta;
        r_try = residual(y_try);
      }
      y = y_try;
      r = r_try;
    }
  }
  if (std::isfinite(static_cast<double>(r)) && abs(r) <= opts.tolerance) return y;
  throw SolverError("implicit multistep solve did not converge at step " +
                        std::to_string(step_index) + " (residual " +
                        std::to_string(static_cast<double>(abs(r))) + ", " + std::to_string(it) +
                        " iterations)",
                    step_index, static_cast<double>(abs(r)), it);
}

/// One step of the s-stage recurrence: returns y_{n+1} given the warm history
/// (y_n, ..., y_{n-s+1}). `rhs(y, t)` is only evaluated at t_next, and only
/// for implicit tableaus; `jac(y, t)` is d rhs / dy.
template <class Scalar, class Rhs, class Jac = NoJacobian>
Scalar step(const MultistepTableau<Scalar>& tab, const History<Scalar>& hist, Scalar dt,
            Scalar t_next, Rhs&& rhs, Jac&& jac = {},
            const ImplicitSolveOptions<Scalar>& opts = {}, std::ptrdiff_t step_index = -1) {
  if (hist.depth() < tab.stages() || hist.size() < tab.stages()) {
    throw ConfigError("multistep step: history holds " + std::to_string(hist.size()) +
                      " entries, scheme '" + tab.name() + "' needs " +
                      std::to_string(tab.stages()));
  }
  const Scalar known = explicit_part(tab, hist, dt);
  if (tab.is_explicit()) return known;

  const Scalar h = dt * tab.b_implicit();
  const Scalar guess = known + h * hist.rhs(0);
  auto f = [&](Scalar y) { return rhs(y, t_next); };
  if constexpr (std::is_same_v<std::decay_t<Jac>, NoJacobian>) {
    return solve_implicit(known, h, guess, f, NoJacobian{}, opts, step_index);
  } else {
    auto df = [&](Scalar y) { return jac(y, t_next); };
    return solve_implicit(known, h, guess, f, df, opts, step_index);
  }
}

}  // namespace lmmadj::lmm
