#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/lmm/bootstrap.hpp"
#include "lmmadj/lmm/tableau.hpp"
#include "lmmadj/ode/forward.hpp"
#include "lmmadj/ode/problem.hpp"

namespace lmmadj::ode {

/// How the last s multipliers p_{N-s+1}, ..., p_N are obtained.
enum class TerminalMode {
  /// The route's own terminal data: the truncated discrete optimality
  /// conditions for DtO, replication of j_y(y_N) for OtD.
  Native,
  /// Sample problem.p_exact on the terminal block (both routes).
  Exact,
  /// OtD only: RK4 backward from p_N = j_y(y_N) along the interpolated trajectory.
  RkBackward,
};

namespace detail {

template <class Scalar>
std::vector<Scalar> fy_on_grid(const OdeControlProblem<Scalar>& problem,
                               const Trajectory<Scalar>& tr) {
  std::vector<Scalar> g(tr.grid.steps() + 1);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto i = static_cast<std::ptrdiff_t>(n);
    g[n] = problem.f_y(tr.y(i), tr.u(i), tr.t(i));
  }
  return g;
}

/// Backward sweep shared by both routes, for m = start, ..., 0:
///   p_m (1 - dt b_{-1} g_m) = -sum_l a_l p_{m+1+l} + dt sum_{l>=0} b_l G(m,l) p_{m+1+l} + src_m
/// with G(m,l) = g_m (DtO) or g_{m+1+l} (OtD); entries beyond N count as zero.
template <class Scalar>
void backward_sweep(const lmm::MultistepTableau<Scalar>& tab, Scalar dt,
                    const std::vector<Scalar>& g, AdjointRoute route, std::ptrdiff_t start,
                    Scalar terminal_source, std::vector<Scalar>& p) {
  const auto last = static_cast<std::ptrdiff_t>(p.size()) - 1;
  const auto s = static_cast<std::ptrdiff_t>(tab.stages());
  for (std::ptrdiff_t m = start; m >= 0; --m) {
    Scalar lin{0};
    Scalar src{0};
    for (std::ptrdiff_t l = 0; l < s; ++l) {
      const std::ptrdiff_t k = m + 1 + l;
      if (k > last) break;
      const auto ku = static_cast<std::size_t>(k);
      const Scalar coupling =
          route == AdjointRoute::DiscretizeThenOptimize ? g[static_cast<std::size_t>(m)] : g[ku];
      lin -= tab.a(static_cast<std::size_t>(l)) * p[ku];
      src += tab.b(static_cast<int>(l)) * coupling * p[ku];
    }
    Scalar rhs = lin + dt * src;
    if (m == last) rhs += terminal_source;
    const Scalar denom = Scalar(1) - dt * tab.b_implicit() * g[static_cast<std::size_t>(m)];
    if (std::abs(denom) <= std::numeric_limits<Scalar>::epsilon() * Scalar(16)) {
      throw SolverError("singular adjoint solve at step " + std::to_string(m) +
                            " (1 - dt b_{-1} f_y = " + std::to_string(static_cast<double>(denom)) +
                            ")",
                        m);
    }
    p[static_cast<std::size_t>(m)] = rhs / denom;
    if (!std::isfinite(static_cast<double>(p[static_cast<std::size_t>(m)]))) {
      throw SolverError("adjoint solve blew up at step " + std::to_string(m), m);
    }
  }
}

template <class Scalar>
void seed_exact(const OdeControlProblem<Scalar>& problem, const Trajectory<Scalar>& tr,
                std::size_t s, std::vector<Scalar>& p) {
  if (!problem.p_exact) throw ConfigError("exact terminal block requested without p_exact");
  const std::size_t N = tr.grid.steps();
  for (std::size_t k = 0; k < s && k <= N; ++k) {
    p[N - k] = problem.p_exact(tr.t(static_cast<std::ptrdiff_t>(N - k)));
  }
}

}  // namespace detail

/// Discrete adjoint of the multistep scheme (optimality conditions of the
/// discretized problem). Returned with the sign of the continuous adjoint,
/// i.e. p = -(Lagrange multiplier), so that p_N ~ +j_y(y_N).
template <class Scalar>
AdjointTrajectory<Scalar> solve_adjoint_dto(const OdeControlProblem<Scalar>& problem,
                                            const lmm::MultistepTableau<Scalar>& tab,
                                            const Trajectory<Scalar>& tr,
                                            TerminalMode terminal = TerminalMode::Native) {
  problem.validate();
  const std::size_t N = tr.grid.steps();
  const std::size_t s = tab.stages();
  AdjointTrajectory<Scalar> adj{tr.grid, AdjointRoute::DiscretizeThenOptimize,
                                std::vector<Scalar>(N + 1, Scalar(0))};
  const auto g = detail::fy_on_grid(problem, tr);
  const auto last = static_cast<std::ptrdiff_t>(N);
  switch (terminal) {
    case TerminalMode::Native:
      detail::backward_sweep(tab, tr.grid.dt(), g, adj.route, last,
                             problem.j_y(tr.y(last)), adj.p);
      break;
    case TerminalMode::Exact:
      detail::seed_exact(problem, tr, s, adj.p);
      detail::backward_sweep(tab, tr.grid.dt(), g, adj.route, last - static_cast<std::ptrdiff_t>(s),
                             Scalar(0), adj.p);
      break;
    case TerminalMode::RkBackward:
      throw ConfigError("RK terminal bootstrap applies to the OtD route only");
  }
  return adj;
}

/// Multistep discretization of -p' = f_y(y, u, t) p run backward in time.
template <class Scalar>
AdjointTrajectory<Scalar> solve_adjoint_otd(const OdeControlProblem<Scalar>& problem,
                                            const lmm::MultistepTableau<Scalar>& tab,
                                            const Trajectory<Scalar>& tr,
                                            TerminalMode terminal = TerminalMode::Native) {
  problem.validate();
  const std::size_t N = tr.grid.steps();
  const std::size_t s = tab.stages();
  AdjointTrajectory<Scalar> adj{tr.grid, AdjointRoute::OptimizeThenDiscretize,
                                std::vector<Scalar>(N + 1, Scalar(0))};
  const auto g = detail::fy_on_grid(problem, tr);
  const auto last = static_cast<std::ptrdiff_t>(N);
  const Scalar pT = problem.j_y(tr.y(last));
  switch (terminal) {
    case TerminalMode::Native:
      for (std::size_t k = 0; k < s && k <= N; ++k) adj.p[N - k] = pT;
      break;
    case TerminalMode::Exact:
      detail::seed_exact(problem, tr, s, adj.p);
      break;
    case TerminalMode::RkBackward: {
      // -p' = g(t) p with g from the interpolated trajectory.
      auto rhs = [&](Scalar p, Scalar t) {
        const Scalar y = detail::interpolate_samples(tr.states, tr.grid, tr.stages, t);
        const Scalar u = detail::interpolate_samples(tr.controls, tr.grid, tr.stages, t);
        return -problem.f_y(y, u, t) * p;
      };
      constexpr int substeps = 4;
      const Scalar h = -tr.grid.dt() / Scalar(substeps);
      Scalar p = pT;
      adj.p[N] = pT;
      for (std::size_t k = 1; k < s && k <= N; ++k) {
        for (int sub = 0; sub < substeps; ++sub) {
          const Scalar t = tr.t(static_cast<std::ptrdiff_t>(N - k + 1)) + Scalar(sub) * h;
          p = lmm::rk4_step(rhs, p, t, h);
        }
        adj.p[N - k] = p;
      }
      break;
    }
  }
  detail::backward_sweep(tab, tr.grid.dt(), g, adj.route, last - static_cast<std::ptrdiff_t>(s),
                         Scalar(0), adj.p);
  return adj;
}

template <class Scalar>
AdjointTrajectory<Scalar> solve_adjoint(AdjointRoute route, const OdeControlProblem<Scalar>& problem,
                                        const lmm::MultistepTableau<Scalar>& tab,
                                        const Trajectory<Scalar>& tr, TerminalMode terminal) {
  return route == AdjointRoute::DiscretizeThenOptimize
             ? solve_adjoint_dto(problem, tab, tr, terminal)
             : solve_adjoint_otd(problem, tab, tr, terminal);
}

/// Discrete cost j(y_N) + alpha/2 * dt * sum_{i=0}^N u_i^2.
template <class Scalar>
Scalar discrete_cost(const OdeControlProblem<Scalar>& problem, const Trajectory<Scalar>& tr) {
  Scalar running{0};
  for (std::ptrdiff_t i = 0; i <= tr.last(); ++i) running += tr.u(i) * tr.u(i);
  return problem.j(tr.y(tr.last())) + problem.alpha / Scalar(2) * tr.grid.dt() * running;
}

/// Stationarity residual on indices 0..N.
///   OtD: p_i f_u(y_i, u_i) + alpha u_i
///   DtO: dt ((B^T p)_i f_u(y_i, u_i) + alpha u_i), the exact gradient of discrete_cost
///        with respect to u_i. No step produces y_0, so (B^T p)_0 omits b_{-1} p_0.
template <class Scalar>
std::vector<Scalar> optimality_residual(const OdeControlProblem<Scalar>& problem,
                                        const Trajectory<Scalar>& tr,
                                        const AdjointTrajectory<Scalar>& adj,
                                        const lmm::MultistepTableau<Scalar>& tab) {
  const std::size_t N = tr.grid.steps();
  if (adj.p.size() != N + 1 || adj.grid.steps() != N) {
    throw ConfigError("optimality_residual: trajectory and adjoint grids differ");
  }
  std::vector<Scalar> r(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    const auto n = static_cast<std::ptrdiff_t>(i);
    const Scalar fu = problem.f_u(tr.y(n), tr.u(n), tr.t(n));
    if (adj.route == AdjointRoute::OptimizeThenDiscretize) {
      r[i] = adj.p[i] * fu + problem.alpha * tr.u(n);
      continue;
    }
    Scalar btp{0};
    for (int l = (i == 0 ? 0 : -1); l < static_cast<int>(tab.stages()); ++l) {
      const std::ptrdiff_t k = n + 1 + l;
      if (k > static_cast<std::ptrdiff_t>(N)) break;
      btp += tab.b(l) * adj.p[static_cast<std::size_t>(k)];
    }
    r[i] = tr.grid.dt() * (btp * fu + problem.alpha * tr.u(n));
  }
  return r;
}

}  // namespace lmmadj::ode
