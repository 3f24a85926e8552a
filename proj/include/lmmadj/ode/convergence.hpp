#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "lmmadj/ode/problem.hpp"

namespace lmmadj::ode {

/// max_{n=0..N} |p_n - p_exact(t_n)|
template <class Scalar>
Scalar adjoint_error(const AdjointTrajectory<Scalar>& adj, const std::function<Scalar(Scalar)>& exact) {
  Scalar err{0};
  for (std::size_t n = 0; n < adj.p.size(); ++n) {
    const Scalar d = std::abs(adj.p[n] - exact(adj.grid.time(static_cast<std::ptrdiff_t>(n))));
    if (d > err) err = d;
  }
  return err;
}

/// max_{n=0..N} |y_n - y_exact(t_n)|
template <class Scalar>
Scalar state_error(const Trajectory<Scalar>& tr, const std::function<Scalar(Scalar)>& exact) {
  Scalar err{0};
  for (std::ptrdiff_t n = 0; n <= tr.last(); ++n) {
    const Scalar d = std::abs(tr.y(n) - exact(tr.t(n)));
    if (d > err) err = d;
  }
  return err;
}

/// rate = log2(err_coarse / err_fine) for a grid halving. NaN when undefined.
inline double observed_rate(double err_coarse, double err_fine) {
  if (!(err_coarse > 0.0) || !(err_fine > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(err_coarse / err_fine);
}

}  // namespace lmmadj::ode
