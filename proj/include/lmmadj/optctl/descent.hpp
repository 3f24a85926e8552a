#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/lmm/tableau.hpp"
#include "lmmadj/optctl/functional.hpp"
#include "lmmadj/relax/solver.hpp"

namespace lmmadj::optctl {

enum class BBVariant { BB1, BB2 };

struct BBOptions {
  BBVariant variant = BBVariant::BB2;
  double sigma0 = 0.1;
  double sigma_min = 1e-6;
  double sigma_max = 1e2;
};

/// Barzilai-Borwein step from one (control, gradient) difference pair.
/// BB2: <du,dg>/<dg,dg>; BB1: <du,du>/<du,dg>. Falls back to `previous` when
/// the denominator vanishes; the result is clamped to [sigma_min, sigma_max].
inline double bb_step(const LagrangianGrid& grid, const Macro& du, const Macro& dg,
                      double previous, const BBOptions& opt = {}) {
  double num, den;
  if (opt.variant == BBVariant::BB2) {
    num = inner(grid, du, dg);
    den = inner(grid, dg, dg);
  } else {
    num = inner(grid, du, du);
    den = inner(grid, du, dg);
  }
  if (den == 0.0 || !std::isfinite(num / den)) return previous;
  return std::clamp(num / den, opt.sigma_min, opt.sigma_max);
}

struct DescentOptions {
  std::size_t iterations = 30;
  double tolerance = 1e-8;     // stop when ||g||_inf < tolerance
  BBOptions bb;
  bool use_bb = true;          // false: fixed step sigma0
  std::size_t filter_every = 1;  // 0 disables the TV filter
};

struct IterationRecord {
  std::size_t k = 0;
  double J = 0.0;
  double sigma = 0.0;  // step applied after this iterate; 0 on the last record
  double grad_inf_norm = 0.0;
};

struct DescentState {
  std::size_t k = 0;
  Macro control;
  Macro previous_control;
  Macro previous_gradient;
  double sigma = 0.0;
  std::vector<IterationRecord> log;
  double max_moment_defect = 0.0;  // over every forward solve so far
};

struct ControlProblem {
  RelaxationModel model;
  LagrangianGrid grid;
  lmm::MultistepTableau<double> tableau;
  std::size_t steps = 0;
  TrackingFunctional functional;
};

struct OptimizeResult {
  DescentState state;
  Macro terminal;  // u(T) of the final control
};

/// Forward solve from `u0` and return u(T).
inline Macro forward_terminal(const ControlProblem& pb, const Macro& u0) {
  return relax::run_forward(pb.model, pb.grid, u0, pb.tableau, pb.steps).u.back();
}

/// Target data: forward evolution of the true initial data.
inline TrackingFunctional make_target(const RelaxationModel& model, const LagrangianGrid& grid,
                                      const lmm::MultistepTableau<double>& tab, std::size_t steps,
                                      const Macro& true_u0) {
  return {relax::run_forward(model, grid, true_u0, tab, steps).u.back()};
}

struct CostGradient {
  double J = 0.0;
  Macro gradient;
  Macro terminal;               // u(T)
  double moment_defect = 0.0;   // max |Q E(u) - u| along the forward run
};

/// J and its gradient with respect to u0.
inline CostGradient cost_and_gradient(const ControlProblem& pb, const Macro& u0) {
  auto fr = relax::run_forward(pb.model, pb.grid, u0, pb.tableau, pb.steps);
  CostGradient out;
  out.J = evaluate_functional(pb.grid, pb.functional, fr.u.back());
  const auto term =
      relax::terminal_adjoint(pb.model, functional_derivative(pb.grid, pb.functional, fr.u.back()));
  const auto ar = relax::run_adjoint(pb.model, pb.grid, fr.u, term, pb.tableau);
  out.gradient = gradient_from_adjoint(pb.model, ar.lambda0, u0);
  out.terminal = std::move(fr.u.back());
  out.moment_defect = fr.max_moment_defect;
  return out;
}

/// Steepest descent u0 <- F(u0 - sigma_k g_k) with Barzilai-Borwein steps.
/// `on_iteration` (optional) sees every record together with the state whose
/// control produced it.
inline OptimizeResult optimize(const ControlProblem& pb, const Macro& guess,
                               const DescentOptions& opt,
                               const std::function<void(const IterationRecord&, const DescentState&)>& on_iteration = {}) {
  OptimizeResult res;
  DescentState& st = res.state;
  st.control = guess;
  st.sigma = opt.bb.sigma0;
  for (st.k = 0;; ++st.k) {
    CostGradient cg;
    try {
      cg = cost_and_gradient(pb, st.control);
    } catch (const SolverError& e) {
      throw SolverError("descent iteration " + std::to_string(st.k) + ": " + e.what(), e.step(),
                        e.residual(), e.iterations());
    } catch (const ModelError& e) {
      throw ModelError("descent iteration " + std::to_string(st.k) + ": " + e.what());
    }
    const Macro& g = cg.gradient;
    res.terminal = cg.terminal;
    st.max_moment_defect = std::max(st.max_moment_defect, cg.moment_defect);
    IterationRecord rec{st.k, cg.J, 0.0, inf_norm(g)};
    const bool done = st.k >= opt.iterations || rec.grad_inf_norm < opt.tolerance;
    if (!done) {
      if (opt.use_bb && st.k > 0) {
        Macro du = st.control, dg = g;
        for (std::size_t r = 0; r < du.size(); ++r) {
          for (std::size_t i = 0; i < du[r].size(); ++i) {
            du[r][i] -= st.previous_control[r][i];
            dg[r][i] -= st.previous_gradient[r][i];
          }
        }
        st.sigma = bb_step(pb.grid, du, dg, st.sigma, opt.bb);
      }
      rec.sigma = st.sigma;
    }
    st.log.push_back(rec);
    if (on_iteration) on_iteration(rec, st);
    if (done) break;

    st.previous_control = st.control;
    st.previous_gradient = g;
    const bool filter = opt.filter_every > 0 && (st.k + 1) % opt.filter_every == 0;
    for (std::size_t r = 0; r < st.control.size(); ++r) {
      auto& c = st.control[r];
      for (std::size_t i = 0; i < c.size(); ++i) c[i] -= st.sigma * g[r][i];
      if (filter) c = tv_filter(c, pb.grid.boundary);
    }
  }
  return res;
}

}  // namespace lmmadj::optctl
