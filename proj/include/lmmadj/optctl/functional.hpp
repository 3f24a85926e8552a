#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/relax/grid.hpp"
#include "lmmadj/relax/model.hpp"
#include "lmmadj/relax/solver.hpp"

namespace lmmadj::optctl {

using relax::Kinetic;
using relax::LagrangianGrid;
using relax::Macro;
using relax::RelaxationModel;

/// J(u) = 1/2 sum_r sum_i w_i (u_r,i - target_r,i)^2.
struct TrackingFunctional {
  Macro target;
};

inline void check_shape(const LagrangianGrid& grid, const Macro& a, const Macro& b,
                        const char* what) {
  if (a.size() != b.size()) throw ConfigError(std::string(what) + ": component count mismatch");
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r].size() != grid.points() || b[r].size() != grid.points()) {
      throw ConfigError(std::string(what) + ": array does not match the grid");
    }
  }
}

inline double evaluate_functional(const LagrangianGrid& grid, const TrackingFunctional& fn,
                                  const Macro& u) {
  check_shape(grid, u, fn.target, "evaluate_functional");
  double J = 0.0;
  for (std::size_t r = 0; r < u.size(); ++r) {
    for (std::size_t i = 0; i < u[r].size(); ++i) {
      const double d = u[r][i] - fn.target[r][i];
      J += grid.weight(i) * d * d;
    }
  }
  return 0.5 * J;
}

/// Pointwise derivative dJ/du = u - target (L2 gradient).
inline Macro functional_derivative(const LagrangianGrid& grid, const TrackingFunctional& fn,
                                   const Macro& u) {
  check_shape(grid, u, fn.target, "functional_derivative");
  Macro d = u;
  for (std::size_t r = 0; r < u.size(); ++r) {
    for (std::size_t i = 0; i < u[r].size(); ++i) d[r][i] -= fn.target[r][i];
  }
  return d;
}

/// Gradient of J with respect to the macroscopic initial data u0 when the
/// kinetic data are lifted to equilibrium: g_r = sum_j lambda^j(0) dE_j/du_r(u0).
inline Macro gradient_from_adjoint(const RelaxationModel& model, const Kinetic& lambda0,
                                   const Macro& u0) {
  const std::size_t N = model.velocity_count();
  const std::size_t n = model.conserved_count();
  if (lambda0.size() != N || u0.size() != n) {
    throw ConfigError("gradient_from_adjoint: adjoint or control has the wrong shape");
  }
  const std::size_t M = u0.front().size();
  Macro g(n, std::vector<double>(M, 0.0));
  std::vector<double> ui(n), J(N * n);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t r = 0; r < n; ++r) ui[r] = u0[r][i];
    model.jacobian(ui.data(), J.data());
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < N; ++j) s += lambda0[j][i] * J[j * n + r];
      g[r][i] = s;
    }
  }
  return g;
}

/// Weighted inner product sum_r sum_i w_i a_r,i b_r,i.
inline double inner(const LagrangianGrid& grid, const Macro& a, const Macro& b) {
  double s = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t i = 0; i < a[r].size(); ++i) s += grid.weight(i) * a[r][i] * b[r][i];
  }
  return s;
}

inline double inf_norm(const Macro& a) {
  double m = 0.0;
  for (const auto& c : a) {
    for (double v : c) m = std::max(m, std::abs(v));
  }
  return m;
}

/// Discrete total variation; periodic grids include the wrap-around jump.
inline double total_variation(const std::vector<double>& u, relax::Boundary boundary) {
  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) tv += std::abs(u[i + 1] - u[i]);
  if (boundary == relax::Boundary::Periodic && u.size() > 1) tv += std::abs(u.front() - u.back());
  return tv;
}

/// (u_{i-1} + 2 u_i + u_{i+1}) / 4 with periodic wrap or a mirrored end value.
inline std::vector<double> tv_filter(const std::vector<double>& u, relax::Boundary boundary) {
  const std::size_t M = u.size();
  if (M < 2) return u;
  std::vector<double> out(M);
  for (std::size_t i = 0; i < M; ++i) {
    double l, r;
    if (boundary == relax::Boundary::Periodic) {
      l = u[(i + M - 1) % M];
      r = u[(i + 1) % M];
    } else {
      l = i == 0 ? u[0] : u[i - 1];
      r = i + 1 == M ? u[M - 1] : u[i + 1];
    }
    out[i] = 0.25 * (l + 2.0 * u[i] + r);
  }
  return out;
}

}  // namespace lmmadj::optctl
