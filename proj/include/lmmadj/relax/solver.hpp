#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/lmm/tableau.hpp"
#include "lmmadj/relax/grid.hpp"
#include "lmmadj/relax/model.hpp"

namespace lmmadj::relax {

/// Conserved variables on the stored nodes, indexed [component][node].
using Macro = std::vector<std::vector<double>>;
/// Kinetic densities on the stored nodes, indexed [velocity][node].
using Kinetic = std::vector<std::vector<double>>;

/// The last `depth` time levels of a kinetic quantity. Level 0 is the most
/// recently computed one and sits at time index `index`; level k sits at
/// index - k (forward fields) or index + k (adjoint fields).
struct FieldHistory {
  std::size_t depth = 1;
  std::ptrdiff_t index = 0;
  std::deque<Kinetic> levels;

  [[nodiscard]] const Kinetic& level(std::size_t k) const {
    if (k >= levels.size()) {
      throw ConfigError("field history: level " + std::to_string(k) + " not stored (have " +
                        std::to_string(levels.size()) + ")");
    }
    return levels[k];
  }
  void push(Kinetic next, std::ptrdiff_t next_index) {
    levels.push_front(std::move(next));
    if (levels.size() > depth) levels.pop_back();
    index = next_index;
  }
};

/// Forward densities f^j at t_n, t_{n-1}, ... (Eulerian node values).
using KineticField = FieldHistory;
/// Adjoint densities lambda^j at t_m, t_{m+1}, ...
using AdjointField = FieldHistory;

inline void require_bdf(const lmm::MultistepTableau<double>& tab) {
  if (!tab.is_bdf()) {
    throw ConfigError("relaxation solver needs a BDF tableau, got '" + tab.name() + "'");
  }
}

/// Tableau for a step that only has `available` levels: BDF(min(s, available)).
inline lmm::MultistepTableau<double> startup_tableau(const lmm::MultistepTableau<double>& tab,
                                                     std::size_t available) {
  if (available >= tab.stages()) return tab;
  return lmm::tableau<double>("BDF" + std::to_string(available));
}

/// u = Q f at every node.
inline Macro moments(const RelaxationModel& model, const Kinetic& f) {
  const std::size_t N = model.velocity_count();
  const std::size_t n = model.conserved_count();
  const std::size_t M = f.front().size();
  Macro u(n, std::vector<double>(M, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < N; ++j) {
      const double q = model.q(r, j);
      if (q == 0.0) continue;
      for (std::size_t i = 0; i < M; ++i) u[r][i] += q * f[j][i];
    }
  }
  return u;
}

/// f^j = E_j(u) at every node.
inline Kinetic lift_equilibrium(const RelaxationModel& model, const Macro& u) {
  const std::size_t N = model.velocity_count();
  const std::size_t n = model.conserved_count();
  if (u.size() != n) throw ConfigError("lift_equilibrium: component count mismatch");
  const std::size_t M = u.front().size();
  Kinetic f(N, std::vector<double>(M));
  std::vector<double> ui(n), E(N);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t r = 0; r < n; ++r) ui[r] = u[r][i];
    model.equilibrium(ui.data(), E.data());
    for (std::size_t j = 0; j < N; ++j) f[j][i] = E[j];
  }
  return f;
}

/// Conserved variables of level k of a forward field.
inline Macro reconstruct_macroscopic(const KineticField& field, const RelaxationModel& model,
                                     std::size_t k = 0) {
  return moments(model, field.level(k));
}

inline KineticField initial_field(const RelaxationModel& model, const Macro& u0, std::size_t depth) {
  KineticField field;
  field.depth = depth;
  field.push(lift_equilibrium(model, u0), 0);
  return field;
}

/// One semi-Lagrangian BDF step, t_n -> t_{n+1}:
///   H^j(x)     = -sum_l a_l f^{j,n-l}(x - (l+1) v_j dt)
///   u^{n+1}    = Q H                       (Q E(u) = u removes the implicit term)
///   f^{j,n+1}  = beta E_j(u^{n+1}) + gamma H^j,
/// beta = dt b/(dt b + eps), gamma = eps/(dt b + eps). While fewer than s
/// levels are stored the step uses BDF of the available order.
/// Returns u^{n+1}; `defect` (optional) receives max |Q E(u^{n+1}) - u^{n+1}|.
inline Macro forward_step(const RelaxationModel& model, const LagrangianGrid& grid,
                          KineticField& field, const lmm::MultistepTableau<double>& tab,
                          double* defect = nullptr) {
  require_bdf(tab);
  const auto t = startup_tableau(tab, field.levels.size());
  const std::size_t N = model.velocity_count();
  const std::size_t n = model.conserved_count();
  const std::size_t M = grid.points();
  const std::size_t s = t.stages();

  Kinetic H(N, std::vector<double>(M, 0.0));
  for (std::size_t j = 0; j < N; ++j) {
    const double cells = grid.shift(model.velocities[j]);
    for (std::size_t l = 0; l < s; ++l) {
      const auto& f = field.level(l)[j];
      const double a = t.a(l);
      const double c = static_cast<double>(l + 1) * cells;
      for (std::size_t i = 0; i < M; ++i) H[j][i] -= a * grid.at_foot(f, i, c);
    }
  }
  Macro u = moments(model, H);

  const double h = grid.dt * t.b_implicit();
  const double beta = h / (h + model.epsilon);
  const double gamma = model.epsilon / (h + model.epsilon);
  Kinetic next(N, std::vector<double>(M));
  std::vector<double> ui(n), E(N);
  double worst = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t r = 0; r < n; ++r) ui[r] = u[r][i];
    model.equilibrium(ui.data(), E.data());
    for (std::size_t j = 0; j < N; ++j) {
      next[j][i] = beta * E[j] + gamma * H[j][i];
      if (!std::isfinite(next[j][i])) {
        throw SolverError("relaxation forward step " + std::to_string(field.index + 1) +
                              ": non-finite value at node " + std::to_string(i),
                          field.index + 1);
      }
    }
    if (defect) {
      for (std::size_t r = 0; r < n; ++r) {
        double qe = 0.0;
        for (std::size_t j = 0; j < N; ++j) qe += model.q(r, j) * E[j];
        worst = std::max(worst, std::abs(qe - ui[r]));
      }
    }
  }
  if (defect) *defect = worst;
  field.push(std::move(next), field.index + 1);
  return u;
}

/// Integral of each conserved component (trapezoid weights).
inline std::vector<double> total_mass(const LagrangianGrid& grid, const Macro& u) {
  std::vector<double> m(u.size(), 0.0);
  for (std::size_t r = 0; r < u.size(); ++r) {
    for (std::size_t i = 0; i < u[r].size(); ++i) m[r] += grid.weight(i) * u[r][i];
  }
  return m;
}

struct ForwardRun {
  std::vector<Macro> u;                   // u at t_0..t_steps
  KineticField field;                     // final s levels
  std::vector<std::vector<double>> mass;  // per level, per component
  double max_moment_defect = 0.0;         // max |Q E(u) - u| over all steps and nodes
};

/// Runs `steps` forward steps from equilibrium data u0, storing u at every level.
inline ForwardRun run_forward(const RelaxationModel& model, const LagrangianGrid& grid,
                              const Macro& u0, const lmm::MultistepTableau<double>& tab,
                              std::size_t steps) {
  require_bdf(tab);
  grid.validate(model);
  for (const auto& comp : u0) {
    if (comp.size() != grid.points()) {
      throw ConfigError("run_forward: initial data has " + std::to_string(comp.size()) +
                        " nodes, grid stores " + std::to_string(grid.points()));
    }
  }
  ForwardRun run;
  run.field = initial_field(model, u0, tab.stages());
  run.u.reserve(steps + 1);
  run.u.push_back(u0);
  run.mass.push_back(total_mass(grid, u0));
  for (std::size_t n = 0; n < steps; ++n) {
    double defect = 0.0;
    run.u.push_back(forward_step(model, grid, run.field, tab, &defect));
    run.mass.push_back(total_mass(grid, run.u.back()));
    run.max_moment_defect = std::max(run.max_moment_defect, defect);
  }
  return run;
}

/// lambda^j(T) = sum_r Q_{rj} dJ/du_r.
inline Kinetic terminal_adjoint(const RelaxationModel& model, const Macro& dJdu) {
  const std::size_t N = model.velocity_count();
  const std::size_t n = model.conserved_count();
  if (dJdu.size() != n) throw ConfigError("terminal_adjoint: component count mismatch");
  const std::size_t M = dJdu.front().size();
  Kinetic lam(N, std::vector<double>(M, 0.0));
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t r = 0; r < n; ++r) {
      const double q = model.q(r, j);
      for (std::size_t i = 0; i < M; ++i) lam[j][i] += q * dJdu[r][i];
    }
  }
  return lam;
}

/// One backward step t_{m+1} -> t_m of the adjoint BDF scheme:
///   R^j(x)  = -sum_i a_i lambda^j(t_{m+1+i}, x + (i+1) v_j dt)
/// (the shift is applied as the transpose of the forward foot operator, so
/// clamped boundaries collect the clamped feet)
///   Z_j(x)  = sum_k (grad E_k(u(t_m, x)) . Q_{:,j}) R^k(x)
///   lambda^j(t_m, x) = gamma R^j + beta Z_j.
/// `u_m` is the forward state at t_m. Startup uses BDF of the available order.
inline void adjoint_step(const RelaxationModel& model, const LagrangianGrid& grid,
                         AdjointField& adj, const Macro& u_m,
                         const lmm::MultistepTableau<double>& tab) {
  require_bdf(tab);
  const auto t = startup_tableau(tab, adj.levels.size());
  const std::size_t N = model.velocity_count();
  const std::size_t n = model.conserved_count();
  const std::size_t M = grid.points();
  const std::size_t s = t.stages();
  if (u_m.size() != n || u_m.front().size() != M) {
    throw ConfigError("adjoint_step: forward state does not match the grid");
  }

  Kinetic R(N, std::vector<double>(M, 0.0));
  for (std::size_t j = 0; j < N; ++j) {
    const double cells = grid.shift(model.velocities[j]);
    for (std::size_t l = 0; l < s; ++l) {
      const auto moved = grid.transpose_foot(adj.level(l)[j], static_cast<double>(l + 1) * cells);
      const double a = t.a(l);
      for (std::size_t i = 0; i < M; ++i) R[j][i] -= a * moved[i];
    }
  }

  const double h = grid.dt * t.b_implicit();
  const double beta = h / (h + model.epsilon);
  const double gamma = model.epsilon / (h + model.epsilon);
  Kinetic next(N, std::vector<double>(M));
  std::vector<double> ui(n), J(N * n), W(N * N);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t r = 0; r < n; ++r) ui[r] = u_m[r][i];
    model.jacobian(ui.data(), J.data());
    for (std::size_t j = 0; j < N; ++j) {
      double z = 0.0;
      for (std::size_t k = 0; k < N; ++k) {
        double w = 0.0;
        for (std::size_t r = 0; r < n; ++r) w += J[k * n + r] * model.q(r, j);
        z += w * R[k][i];
      }
      next[j][i] = gamma * R[j][i] + beta * z;
      if (!std::isfinite(next[j][i])) {
        throw SolverError("relaxation adjoint step " + std::to_string(adj.index - 1) +
                              ": non-finite value at node " + std::to_string(i),
                          adj.index - 1);
      }
    }
  }
  adj.push(std::move(next), adj.index - 1);
}

struct AdjointRun {
  Kinetic lambda0;                       // lambda^j(0, .)
  std::vector<std::vector<double>> p;    // p = sum_j lambda^j at t_0..t_steps
};

/// Solves the adjoint from lambda(T) = `terminal` back to t = 0 along the
/// stored forward states `u` (u[0..steps]).
inline AdjointRun run_adjoint(const RelaxationModel& model, const LagrangianGrid& grid,
                              const std::vector<Macro>& u, const Kinetic& terminal,
                              const lmm::MultistepTableau<double>& tab) {
  require_bdf(tab);
  if (u.empty()) throw ConfigError("run_adjoint: forward states missing");
  if (terminal.size() != model.velocity_count()) {
    throw ConfigError("run_adjoint: terminal data has wrong velocity count");
  }
  const std::size_t steps = u.size() - 1;
  auto sum_p = [&](const Kinetic& lam) {
    std::vector<double> p(lam.front().size(), 0.0);
    for (const auto& l : lam) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] += l[i];
    }
    return p;
  };
  AdjointRun run;
  run.p.assign(steps + 1, {});
  AdjointField adj;
  adj.depth = tab.stages();
  adj.push(terminal, static_cast<std::ptrdiff_t>(steps));
  run.p[steps] = sum_p(terminal);
  for (std::size_t m = steps; m-- > 0;) {
    adjoint_step(model, grid, adj, u[m], tab);
    run.p[m] = sum_p(adj.level(0));
  }
  run.lambda0 = adj.level(0);
  return run;
}

}  // namespace lmmadj::relax
