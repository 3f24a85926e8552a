#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "lmmadj/errors.hpp"

namespace lmmadj::relax {

/// Scalar flux F with derivative F'.
struct ScalarFlux {
  std::string name;
  std::function<double(double)> F;
  std::function<double(double)> dF;
};

inline ScalarFlux linear_flux() {
  return {"linear", [](double u) { return u; }, [](double) { return 1.0; }};
}

inline ScalarFlux burgers_flux() {
  return {"burgers", [](double u) { return 0.5 * u * u; }, [](double u) { return u; }};
}

inline ScalarFlux flux_by_name(std::string_view name) {
  if (name == "linear") return linear_flux();
  if (name == "burgers") return burgers_flux();
  throw ConfigError("unknown flux '" + std::string(name) + "' (expected linear or burgers)");
}

/// Discrete-velocity BGK model
///   f^j_t + v_j f^j_x = (E_j(u) - f^j) / eps,   u = Q f,
/// with N velocities and n conserved components.
struct RelaxationModel {
  std::string name;
  std::vector<double> velocities;                 // v_1..v_N
  std::vector<std::string> components;            // names of the n conserved components
  std::vector<double> Q;                          // n x N, row-major
  double epsilon = 1.0;
  /// E(u): u has n entries, E has N.
  std::function<void(const double* u, double* E)> equilibrium;
  /// dE_j/du_r stored at J[j * n + r].
  std::function<void(const double* u, double* J)> jacobian;
  /// F'(u) for scalar models; empty for systems.
  std::function<double(double)> characteristic;

  [[nodiscard]] std::size_t velocity_count() const noexcept { return velocities.size(); }
  [[nodiscard]] std::size_t conserved_count() const noexcept { return components.size(); }
  [[nodiscard]] double q(std::size_t r, std::size_t j) const { return Q[r * velocity_count() + j]; }
  [[nodiscard]] double max_speed() const {
    double s = 0.0;
    for (double v : velocities) s = std::max(s, std::abs(v));
    return s;
  }
};

/// Jin-Xin model: v = (a, -a), Q = (1, 1), E_{1,2}(u) = (a u +- F(u)) / (2a).
inline RelaxationModel make_jin_xin(const ScalarFlux& flux, double a, double epsilon) {
  if (!(a > 0.0)) throw ConfigError("jin-xin: speed a must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("jin-xin: epsilon must be positive");
  RelaxationModel m;
  m.name = "jin-xin/" + flux.name;
  m.velocities = {a, -a};
  m.components = {"u"};
  m.Q = {1.0, 1.0};
  m.epsilon = epsilon;
  m.equilibrium = [F = flux.F, a](const double* u, double* E) {
    const double f = F(u[0]);
    E[0] = (a * u[0] + f) / (2.0 * a);
    E[1] = (a * u[0] - f) / (2.0 * a);
  };
  m.jacobian = [dF = flux.dF, a](const double* u, double* J) {
    const double d = dF(u[0]);
    J[0] = (a + d) / (2.0 * a);
    J[1] = (a - d) / (2.0 * a);
  };
  m.characteristic = flux.dF;
  return m;
}

/// Broadwell model: v = (c, -c, 0), rho = f1 + f2 + 2 f3, m = c (f1 - f2),
/// F = m^2 / (c^2 rho) + rho, E = (F/2 + m/(2c), F/2 - m/(2c), (rho - F)/2).
inline RelaxationModel make_broadwell(double c, double epsilon) {
  if (!(c > 0.0)) throw ConfigError("broadwell: speed c must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("broadwell: epsilon must be positive");
  RelaxationModel m;
  m.name = "broadwell";
  m.velocities = {c, -c, 0.0};
  m.components = {"rho", "m"};
  m.Q = {1.0, 1.0, 2.0, c, -c, 0.0};
  m.epsilon = epsilon;
  m.equilibrium = [c](const double* u, double* E) {
    const double rho = u[0];
    const double mom = u[1];
    if (!(rho > 0.0)) throw ModelError("broadwell: non-positive density " + std::to_string(rho));
    const double F = mom * mom / (c * c * rho) + rho;
    E[0] = 0.5 * F + mom / (2.0 * c);
    E[1] = 0.5 * F - mom / (2.0 * c);
    E[2] = 0.5 * (rho - F);
  };
  m.jacobian = [c](const double* u, double* J) {
    const double rho = u[0];
    const double mom = u[1];
    if (!(rho > 0.0)) throw ModelError("broadwell: non-positive density " + std::to_string(rho));
    const double Fr = 1.0 - mom * mom / (c * c * rho * rho);
    const double Fm = 2.0 * mom / (c * c * rho);
    J[0] = 0.5 * Fr;
    J[1] = 0.5 * Fm + 1.0 / (2.0 * c);
    J[2] = 0.5 * Fr;
    J[3] = 0.5 * Fm - 1.0 / (2.0 * c);
    J[4] = 0.5 * (1.0 - Fr);
    J[5] = -0.5 * Fm;
  };
  return m;
}

/// max_r |(Q E(u))_r - u_r| for one state.
inline double moment_defect(const RelaxationModel& model, const std::vector<double>& u) {
  const std::size_t N = model.velocity_count();
  const std::size_t n = model.conserved_count();
  std::vector<double> E(N);
  model.equilibrium(u.data(), E.data());
  double d = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j) s += model.q(r, j) * E[j];
    d = std::max(d, std::abs(s - u[r]));
  }
  return d;
}

/// Subcharacteristic condition max |v| >= max |F'(u0)|, checked for scalar models.
inline void check_subcharacteristic(const RelaxationModel& model, const std::vector<double>& u0) {
  if (!model.characteristic) return;
  double need = 0.0;
  for (double x : u0) need = std::max(need, std::abs(model.characteristic(x)));
  if (need > model.max_speed() * (1.0 + 1e-12)) {
    throw ConfigError("subcharacteristic condition violated: a = " +
                      std::to_string(model.max_speed()) + " < max|F'(u0)| = " +
                      std::to_string(need));
  }
}

}  // namespace lmmadj::relax
