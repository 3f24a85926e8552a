#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "lmmadj/errors.hpp"
#include "lmmadj/ode/forward.hpp"
#include "lmmadj/ode/problem.hpp"

namespace lmmadj::ode {

/// Reference problems used by the convergence studies.
enum class BuiltinProblem {
  ConstantFy,   // f_y = 1, p(t) = exp(T - t)
  QuadraticFy,  // prescribed y(t) = t^2, f_y = y, p(t) = exp((T^3 - t^3) / 3)
  Riccati,      // y' = y^2 + u, y(0) = 1, tracking y(T) = 1 / (1 - T)
};

inline BuiltinProblem parse_builtin_problem(std::string_view name) {
  if (name == "const-fy" || name == "constant") return BuiltinProblem::ConstantFy;
  if (name == "quadratic-fy" || name == "t2") return BuiltinProblem::QuadraticFy;
  if (name == "riccati" || name == "full") return BuiltinProblem::Riccati;
  throw ConfigError("unknown ode problem '" + std::string(name) +
                    "' (expected const-fy, quadratic-fy or riccati)");
}

inline std::string to_string(BuiltinProblem p) {
  switch (p) {
    case BuiltinProblem::ConstantFy: return "const-fy";
    case BuiltinProblem::QuadraticFy: return "quadratic-fy";
    case BuiltinProblem::Riccati: return "riccati";
  }
  return "?";
}

template <class Scalar>
OdeControlProblem<Scalar> constant_fy_problem(Scalar T) {
  using std::exp;
  OdeControlProblem<Scalar> p;
  p.f = [](Scalar y, Scalar u, Scalar) { return y + u; };
  p.f_y = [](Scalar, Scalar, Scalar) { return Scalar(1); };
  p.f_u = [](Scalar, Scalar, Scalar) { return Scalar(1); };
  p.j = [](Scalar y) { return y; };
  p.j_y = [](Scalar) { return Scalar(1); };
  p.y0 = Scalar(1);
  p.y_exact = [](Scalar t) { return exp(t); };
  p.p_exact = [T](Scalar t) { return exp(T - t); };
  return p;
}

/// The state is prescribed as y(t) = t^2 (see quadratic_fy_trajectory);
/// f = y^2/2 only supplies f_y = y.
template <class Scalar>
OdeControlProblem<Scalar> quadratic_fy_problem(Scalar T) {
  using std::exp;
  OdeControlProblem<Scalar> p;
  p.f = [](Scalar y, Scalar, Scalar) { return y * y / Scalar(2); };
  p.f_y = [](Scalar y, Scalar, Scalar) { return y; };
  p.f_u = [](Scalar, Scalar, Scalar) { return Scalar(0); };
  p.j = [](Scalar y) { return y; };
  p.j_y = [](Scalar) { return Scalar(1); };
  p.y0 = Scalar(0);
  p.y_exact = [](Scalar t) { return t * t; };
  p.p_exact = [T](Scalar t) { return exp((T * T * T - t * t * t) / Scalar(3)); };
  return p;
}

template <class Scalar>
OdeControlProblem<Scalar> riccati_problem(Scalar T, Scalar alpha) {
  const Scalar target = Scalar(1) / (Scalar(1) - T);
  OdeControlProblem<Scalar> p;
  p.f = [](Scalar y, Scalar u, Scalar) { return y * y + u; };
  p.f_y = [](Scalar y, Scalar, Scalar) { return Scalar(2) * y; };
  p.f_u = [](Scalar, Scalar, Scalar) { return Scalar(1); };
  p.j = [target](Scalar y) { return (y - target) * (y - target) / Scalar(2); };
  p.j_y = [target](Scalar y) { return y - target; };
  p.alpha = alpha;
  p.y0 = Scalar(1);
  p.y_exact = [](Scalar t) { return Scalar(1) / (Scalar(1) - t); };
  p.p_exact = [](Scalar) { return Scalar(0); };
  return p;
}

template <class Scalar>
OdeControlProblem<Scalar> make_builtin(BuiltinProblem kind, Scalar T, Scalar alpha = Scalar(1)) {
  switch (kind) {
    case BuiltinProblem::ConstantFy: return constant_fy_problem(T);
    case BuiltinProblem::QuadraticFy: return quadratic_fy_problem(T);
    case BuiltinProblem::Riccati: return riccati_problem(T, alpha);
  }
  throw ConfigError("unknown builtin problem");
}

/// Forward trajectory with u = 0: integrated for ConstantFy and Riccati,
/// prescribed analytically for QuadraticFy.
template <class Scalar>
Trajectory<Scalar> builtin_trajectory(BuiltinProblem kind, const OdeControlProblem<Scalar>& problem,
                                      const lmm::MultistepTableau<Scalar>& tab,
                                      const lmm::TimeGrid<Scalar>& grid) {
  auto zero = [](Scalar) { return Scalar(0); };
  if (kind == BuiltinProblem::QuadraticFy) {
    return prescribed_trajectory(grid, tab.stages(), problem.y_exact, zero);
  }
  return solve_forward(problem, tab, grid, sample_controls(grid, tab.stages(), zero));
}

}  // namespace lmmadj::ode
