#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/relax/grid.hpp"
#include "lmmadj/relax/model.hpp"
#include "lmmadj/relax/solver.hpp"

namespace lmmadj::relax {

/// sqrt(sum_i w_i e_i^2) with the grid's quadrature weights.
inline double l2_norm(const LagrangianGrid& grid, const std::vector<double>& e) {
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) s += grid.weight(i) * e[i] * e[i];
  return std::sqrt(s);
}

/// Maps x into the domain under the boundary rule.
inline double wrap_position(const LagrangianGrid& grid, double x) {
  const double L = grid.x_right - grid.x_left;
  if (grid.boundary == Boundary::Periodic) {
    double y = std::fmod(x - grid.x_left, L);
    if (y < 0) y += L;
    return grid.x_left + y;
  }
  return std::min(std::max(x, grid.x_left), grid.x_right);
}

/// Solution at t_m of the limit adjoint equation -p_t - F'(u) p_x = 0 with
/// p(T) = p_T, by tracing dX/dt = F'(u(t, X)) from each node up to T with
/// Heun's method on the stored forward levels u[0..N] (scalar models only).
inline std::vector<double> transport_oracle(const RelaxationModel& model,
                                            const LagrangianGrid& grid,
                                            const std::vector<Macro>& u,
                                            const std::function<double(double)>& p_terminal,
                                            std::size_t m) {
  if (!model.characteristic) throw ConfigError("transport oracle needs a scalar model");
  if (m >= u.size()) throw ConfigError("transport oracle: time index beyond the forward run");
  const std::size_t N = u.size() - 1;
  const double dx = grid.dx();
  auto speed = [&](std::size_t k, double x) {
    const double pos = (wrap_position(grid, x) - grid.x_left) / dx;
    return model.characteristic(grid.sample(u[k][0], pos));
  };
  std::vector<double> p(grid.points());
  for (std::size_t i = 0; i < p.size(); ++i) {
    double X = grid.x(i);
    for (std::size_t k = m; k < N; ++k) {
      const double k1 = speed(k, X);
      const double k2 = speed(k + 1, X + grid.dt * k1);
      X += 0.5 * grid.dt * (k1 + k2);
    }
    p[i] = p_terminal(wrap_position(grid, X));
  }
  return p;
}

/// L2 distance between the solver's p(0, .) and the characteristics solution
/// of the limit adjoint equation.
inline double viscous_limit_check(const RelaxationModel& model, const LagrangianGrid& grid,
                                  const ForwardRun& forward, const AdjointRun& adjoint,
                                  const std::function<double(double)>& p_terminal) {
  const auto oracle = transport_oracle(model, grid, forward.u, p_terminal, 0);
  std::vector<double> e(oracle.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = adjoint.p.front()[i] - oracle[i];
  return l2_norm(grid, e);
}

}  // namespace lmmadj::relax
