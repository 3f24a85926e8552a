#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lmmadj/cli/config.hpp"
#include "lmmadj/cli/initial.hpp"
#include "lmmadj/cli/table.hpp"
#include "lmmadj/errors.hpp"
#include "lmmadj/lmm/tableau.hpp"
#include "lmmadj/lmm/time_grid.hpp"
#include "lmmadj/ode/adjoint.hpp"
#include "lmmadj/ode/convergence.hpp"
#include "lmmadj/ode/problems.hpp"
#include "lmmadj/optctl/descent.hpp"
#include "lmmadj/relax/diagnostics.hpp"
#include "lmmadj/relax/io.hpp"
#include "lmmadj/relax/solver.hpp"

namespace lmmadj::cli {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Settings that the command line may override on top of the config.
struct Overrides {
  std::optional<lmm::AmDenominator> am_denominator;
  std::optional<std::string> route;  // dto | otd | both
};

struct RunContext {
  std::filesystem::path out_dir = "out";
  Overrides overrides;
  std::ostream* log = nullptr;  // aligned tables go here when set
};

inline std::string experiment_kind(const ExperimentConfig& cfg, const std::string& section) {
  const auto& sec = cfg.section(section);
  const auto it = sec.find("kind");
  return it == sec.end() ? section : it->second;
}

// ---------------------------------------------------------------------------
// ode-converge

struct OdeConvergence {
  std::vector<std::string> schemes;
  std::vector<Table> tables;  // one per scheme
};

inline ode::TerminalMode parse_terminal_mode(const std::string& s, const std::string& where) {
  if (s == "native") return ode::TerminalMode::Native;
  if (s == "exact") return ode::TerminalMode::Exact;
  if (s == "rk" || s == "rk-backward") return ode::TerminalMode::RkBackward;
  throw ConfigError(where + ": unknown terminal mode '" + s + "' (native, exact, rk)");
}

inline lmm::AmDenominator parse_am_denominator(const std::string& s, const std::string& where) {
  if (s == "720") return lmm::AmDenominator::k720;
  if (s == "270") return lmm::AmDenominator::k270;
  throw ConfigError(where + ": AM denominator must be 270 or 720, got '" + s + "'");
}

inline void parse_route(const std::string& s, const std::string& where, bool& dto, bool& otd) {
  if (s == "dto") {
    dto = true, otd = false;
  } else if (s == "otd") {
    dto = false, otd = true;
  } else if (s == "both") {
    dto = otd = true;
  } else {
    throw ConfigError(where + ": route must be dto, otd or both, got '" + s + "'");
  }
}

namespace detail {

template <class R>
Table ode_table(ode::BuiltinProblem kind, const std::string& scheme,
                const std::vector<std::size_t>& ns, double T, double alpha,
                ode::TerminalMode terminal, bool dto, bool otd, lmm::AmDenominator am_den) {
  const bool with_y = kind == ode::BuiltinProblem::Riccati;
  Table t;
  t.header.push_back("N");
  if (dto) t.header.insert(t.header.end(), {"err_dto", "rate_dto"});
  if (otd) t.header.insert(t.header.end(), {"err_otd", "rate_otd"});
  if (with_y) t.header.insert(t.header.end(), {"err_y", "rate_y"});

  const auto tab = lmm::tableau<R>(scheme, am_den);
  const auto pb = ode::make_builtin<R>(kind, static_cast<R>(T), static_cast<R>(alpha));
  std::vector<double> prev;
  for (std::size_t N : ns) {
    const lmm::TimeGrid<R> grid(R(0), static_cast<R>(T), N);
    const auto tr = ode::builtin_trajectory(kind, pb, tab, grid);
    std::vector<double> errs;
    if (dto) {
      errs.push_back(static_cast<double>(
          ode::adjoint_error(ode::solve_adjoint_dto(pb, tab, tr, terminal), pb.p_exact)));
    }
    if (otd) {
      errs.push_back(static_cast<double>(
          ode::adjoint_error(ode::solve_adjoint_otd(pb, tab, tr, terminal), pb.p_exact)));
    }
    if (with_y) errs.push_back(static_cast<double>(ode::state_error(tr, pb.y_exact)));
    std::vector<double> row{static_cast<double>(N)};
    for (std::size_t c = 0; c < errs.size(); ++c) {
      row.push_back(errs[c]);
      row.push_back(prev.empty() ? kNaN : ode::observed_rate(prev[c], errs[c]));
    }
    t.rows.push_back(std::move(row));
    prev = errs;
  }
  return t;
}

}  // namespace detail

/// Convergence tables for one built-in optimal control problem.
/// Keys: problem, schemes, n, T, alpha, terminal, precision, route, am_denominator.
inline OdeConvergence run_ode_convergence(const ExperimentConfig& cfg, const std::string& section,
                                          const RunContext& ctx) {
  SectionReader rd(cfg.section(section), section);
  rd.text("kind", "");
  const auto kind = ode::parse_builtin_problem(rd.text("problem"));
  const bool riccati = kind == ode::BuiltinProblem::Riccati;
  OdeConvergence res;
  res.schemes = rd.list("schemes");
  if (res.schemes.empty()) throw ConfigError(rd.where("schemes") + ": empty list");
  for (const auto& s : res.schemes) lmm::rational_tableau(s);
  const auto ns = rd.increasing_counts("n");
  const double T = rd.number("T", riccati ? 0.875 : 1.0);
  if (!(T > 0.0) || (riccati && T >= 1.0)) {
    throw ConfigError(rd.where("T") + ": must be positive (and below 1 for riccati)");
  }
  const double alpha = rd.number("alpha", 1.0);
  const auto terminal =
      parse_terminal_mode(rd.text("terminal", riccati ? "native" : "exact"), rd.where("terminal"));
  const std::string precision = rd.text("precision", riccati ? "long-double" : "double");
  if (precision != "double" && precision != "long-double") {
    throw ConfigError(rd.where("precision") + ": must be double or long-double");
  }
  bool dto = true, otd = true;
  parse_route(ctx.overrides.route.value_or(rd.text("route", "both")), rd.where("route"), dto, otd);
  auto am_den = parse_am_denominator(rd.text("am_denominator", "720"), rd.where("am_denominator"));
  if (ctx.overrides.am_denominator) am_den = *ctx.overrides.am_denominator;
  rd.finish();
  if (terminal == ode::TerminalMode::RkBackward && dto) {
    throw ConfigError(rd.where("terminal") + ": rk terminal data exist only for the otd route");
  }

  for (const auto& scheme : res.schemes) {
    Table t = precision == "double"
                  ? detail::ode_table<double>(kind, scheme, ns, T, alpha, terminal, dto, otd, am_den)
                  : detail::ode_table<long double>(kind, scheme, ns, T, alpha, terminal, dto, otd,
                                                   am_den);
    const std::string name = lmm::rational_tableau(scheme, am_den).name;
    write_csv(ctx.out_dir / (section + "_" + name + ".csv"), t);
    if (ctx.log) print_table(*ctx.log, section + ": " + name + " (" + ode::to_string(kind) + ")", t);
    res.tables.push_back(std::move(t));
  }
  return res;
}

// ---------------------------------------------------------------------------
// relaxation setup shared by relax-forward, relax-adjoint and control runs

struct RelaxSetup {
  relax::RelaxationModel model;
  relax::LagrangianGrid grid;
  lmm::MultistepTableau<double> tableau = lmm::tableau<double>("BDF2");
  std::size_t steps = 0;
  double speed = 0.0;
};

/// Reads model, flux, speed, x_left, x_right, nx, dt, boundary, foot, epsilon,
/// scheme, T / steps. `speed = auto` means speed = dx / dt; a missing dt
/// means dt = dx / speed.
inline RelaxSetup read_relax_setup(SectionReader& rd, std::size_t nx_override = 0,
                                   std::optional<double> eps_override = {}) {
  RelaxSetup s;
  const std::string model = rd.text("model", "jin-xin");
  const std::string flux = rd.text("flux", "burgers");
  relax::LagrangianGrid& g = s.grid;
  g.x_left = rd.number("x_left");
  g.x_right = rd.number("x_right");
  g.nx = nx_override ? nx_override : rd.count("nx");
  g.boundary = relax::parse_boundary(rd.text("boundary", "periodic"));
  g.mode = relax::parse_foot_mode(rd.text("foot", "aligned"));
  if (!(g.x_right > g.x_left)) throw ConfigError(rd.where("x_right") + ": must exceed x_left");
  if (g.nx < 3) throw ConfigError(rd.where("nx") + ": need at least 3 points");
  const std::string speed = rd.text("speed", "auto");
  if (speed == "auto") {
    g.dt = rd.number("dt");
    s.speed = g.dx() / g.dt;
  } else {
    s.speed = rd.number("speed");
    g.dt = rd.has("dt") ? rd.number("dt") : g.dx() / s.speed;
  }
  if (!(g.dt > 0.0) || !(s.speed > 0.0)) {
    throw ConfigError(rd.where("dt") + ": dt and speed must be positive");
  }
  const double eps = eps_override ? *eps_override : rd.number("epsilon");
  if (model == "jin-xin") {
    s.model = relax::make_jin_xin(relax::flux_by_name(flux), s.speed, eps);
  } else if (model == "broadwell") {
    s.model = relax::make_broadwell(s.speed, eps);
  } else {
    throw ConfigError(rd.where("model") + ": unknown model '" + model + "' (jin-xin, broadwell)");
  }
  s.tableau = lmm::tableau<double>(rd.text("scheme", "BDF2"));
  if (s.tableau.scheme_class() != lmm::SchemeClass::Bdf) {
    throw ConfigError(rd.where("scheme") + ": relaxation solver needs a BDF scheme");
  }
  if (rd.has("steps")) {
    s.steps = rd.count("steps");
  } else {
    const double T = rd.number("T");
    if (!(T > 0.0)) throw ConfigError(rd.where("T") + ": must be positive");
    s.steps = static_cast<std::size_t>(std::ceil(T / g.dt - 1e-9));
  }
  g.validate(s.model);
  return s;
}

inline ProfileSpec read_profile(SectionReader& rd, const std::string& key,
                                const relax::RelaxationModel& model) {
  auto p = ProfileSpec::parse(rd.text(key), rd.where(key));
  if (p.components() != model.conserved_count()) {
    throw ConfigError(rd.where(key) + ": profile has " + std::to_string(p.components()) +
                      " components, model '" + model.name + "' needs " +
                      std::to_string(model.conserved_count()));
  }
  return p;
}

// ---------------------------------------------------------------------------
// relax-forward

struct RelaxForwardResult {
  RelaxSetup setup;
  relax::ForwardRun run;
  double max_mass_drift = 0.0;  // max relative change of each component's mass
};

/// Forward run with snapshots every `snapshot_every` steps plus a mass log.
inline RelaxForwardResult run_relax_forward(const ExperimentConfig& cfg, const std::string& section,
                                            const RunContext& ctx) {
  SectionReader rd(cfg.section(section), section);
  rd.text("kind", "");
  RelaxForwardResult res;
  res.setup = read_relax_setup(rd);
  const auto& s = res.setup;
  const auto initial = read_profile(rd, "initial", s.model);
  const std::size_t every = rd.count("snapshot_every", s.steps);
  rd.finish();

  const auto u0 = initial.sample(s.grid);
  if (s.model.characteristic) relax::check_subcharacteristic(s.model, u0[0]);
  res.run = relax::run_forward(s.model, s.grid, u0, s.tableau, s.steps);

  for (std::size_t n = 0; n <= s.steps; ++n) {
    if (n % every == 0 || n == s.steps) {
      relax::write_snapshot(relax::snapshot_path(ctx.out_dir, section, n), s.grid,
                            s.model.components, res.run.u[n]);
    }
  }
  Table mass;
  mass.header = {"n", "t"};
  for (const auto& c : s.model.components) mass.header.push_back("mass_" + c);
  for (std::size_t n = 0; n <= s.steps; ++n) {
    std::vector<double> row{static_cast<double>(n), static_cast<double>(n) * s.grid.dt};
    for (std::size_t r = 0; r < res.run.mass[n].size(); ++r) {
      row.push_back(res.run.mass[n][r]);
      const double m0 = res.run.mass[0][r];
      const double drift = std::abs(res.run.mass[n][r] - m0) / std::max(std::abs(m0), 1e-300);
      res.max_mass_drift = std::max(res.max_mass_drift, drift);
    }
    mass.rows.push_back(std::move(row));
  }
  write_csv(ctx.out_dir / (section + "_mass.csv"), mass);
  if (ctx.log) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s: %s, nx = %zu, dt = %.6e, steps = %zu, T = %.6f, max mass drift = %.3e, "
                  "max moment defect = %.3e\n\n",
                  section.c_str(), s.model.name.c_str(), s.grid.nx, s.grid.dt, s.steps,
                  static_cast<double>(s.steps) * s.grid.dt, res.max_mass_drift,
                  res.run.max_moment_defect);
    *ctx.log << buf;
  }
  return res;
}

// ---------------------------------------------------------------------------
// relax-adjoint

struct EpsilonStudy {
  Table table;  // epsilon, self_reference, err_nx<..>..., mean_rate
  std::vector<std::size_t> nx;
  std::vector<double> epsilons;
};

namespace detail {

struct AdjointRunOut {
  relax::ForwardRun forward;
  relax::AdjointRun adjoint;
};

/// Forward from u0, adjoint from p(T) = p_T split evenly over the velocities.
inline AdjointRunOut adjoint_from_profile(const RelaxSetup& s, const ProfileSpec& profile) {
  AdjointRunOut out;
  const auto u0 = profile.sample(s.grid);
  out.forward = relax::run_forward(s.model, s.grid, u0, s.tableau, s.steps);
  const std::size_t N = s.model.velocity_count();
  relax::Kinetic term(N, u0[0]);
  for (auto& l : term) {
    for (auto& v : l) v /= static_cast<double>(N);
  }
  out.adjoint = relax::run_adjoint(s.model, s.grid, out.forward.u, term, s.tableau);
  return out;
}

}  // namespace detail

/// Epsilon study: L2 error of p(0, .) over an epsilon x nx study. The reference is
/// the characteristics solution of the limit transport equation for
/// epsilon <= oracle_below, otherwise the same scheme on a nested grid refined
/// `reference_refinement` times in space and time (same final time, shared nodes).
/// Keys: as read_relax_setup (nx and epsilon are lists), initial, oracle_below,
/// reference_refinement.
inline EpsilonStudy run_relax_adjoint(const ExperimentConfig& cfg, const std::string& section,
                                      const RunContext& ctx) {
  SectionReader rd(cfg.section(section), section);
  rd.text("kind", "");
  EpsilonStudy res;
  res.nx = rd.increasing_counts("nx");
  res.epsilons = rd.numbers("epsilon");
  const double oracle_below = rd.number("oracle_below", 1e-3);
  const std::size_t refine = rd.count("reference_refinement", 8);
  // Read the shared keys once with the first entries to validate the section.
  auto first = read_relax_setup(rd, res.nx.front(), res.epsilons.front());
  const auto profile = read_profile(rd, "initial", first.model);
  rd.finish();
  if (!first.model.characteristic) {
    throw ConfigError(rd.where("model") + ": the epsilon study needs a scalar model");
  }
  for (double e : res.epsilons) {
    if (!(e > 0.0)) throw ConfigError(rd.where("epsilon") + ": values must be positive");
  }

  auto setup_for = [&](std::size_t nx, double eps) {
    SectionReader again(cfg.section(section), section);
    return read_relax_setup(again, nx, eps);
  };

  res.table.header = {"epsilon", "self_reference"};
  for (std::size_t nx : res.nx) res.table.header.push_back("err_nx" + std::to_string(nx));
  res.table.header.push_back("mean_rate");
  for (double eps : res.epsilons) {
    const bool self_ref = eps > oracle_below;
    std::vector<double> row{eps, self_ref ? 1.0 : 0.0};
    std::vector<double> errs, dxs;
    for (std::size_t nx : res.nx) {
      const auto s = setup_for(nx, eps);
      const auto run = detail::adjoint_from_profile(s, profile);
      double err;
      if (!self_ref) {
        auto pT = [&](double x) { return profile.at(x)[0]; };
        err = relax::viscous_limit_check(s.model, s.grid, run.forward, run.adjoint, pT);
      } else {
        auto fine = s;
        fine.grid.nx = refine * (s.grid.nx - 1) + 1;
        fine.grid.dt = s.grid.dt / static_cast<double>(refine);
        fine.steps = s.steps * refine;
        fine.grid.validate(fine.model);
        const auto ref = detail::adjoint_from_profile(fine, profile);
        std::vector<double> e(s.grid.points());
        for (std::size_t i = 0; i < e.size(); ++i) {
          e[i] = run.adjoint.p.front()[i] - ref.adjoint.p.front()[i * refine];
        }
        err = relax::l2_norm(s.grid, e);
      }
      errs.push_back(err);
      dxs.push_back(s.grid.dx());
      row.push_back(err);
      if (nx == res.nx.back()) {
        char tag[32];
        std::snprintf(tag, sizeof tag, "_eps%.0e_p", eps);
        relax::write_snapshot(relax::snapshot_path(ctx.out_dir, section + tag, 0), s.grid, {"p"},
                              relax::Macro{run.adjoint.p.front()});
      }
    }
    double mean = 0.0;
    for (std::size_t k = 1; k < errs.size(); ++k) {
      mean += std::log(errs[k - 1] / errs[k]) / std::log(dxs[k - 1] / dxs[k]);
    }
    row.push_back(errs.size() > 1 ? mean / static_cast<double>(errs.size() - 1) : kNaN);
    res.table.rows.push_back(std::move(row));
  }
  write_csv(ctx.out_dir / (section + ".csv"), res.table);
  if (ctx.log) {
    char title[256];
    std::snprintf(title, sizeof title,
                  "%s: L2 error of p(0,.), final time ceil(T/dt) dt on each grid "
                  "(self_reference = 1: nested grid refined %zux)",
                  section.c_str(), refine);
    print_table(*ctx.log, title, res.table);
  }
  return res;
}

// ---------------------------------------------------------------------------
// control-jinxin / control-broadwell

struct ControlResult {
  RelaxSetup setup;
  relax::Macro truth;
  relax::Macro guess;
  optctl::OptimizeResult result;
};

inline double l2_distance(const relax::LagrangianGrid& g, const relax::Macro& a,
                          const relax::Macro& b) {
  relax::Macro d = a;
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (std::size_t i = 0; i < d[r].size(); ++i) d[r][i] -= b[r][i];
  }
  return std::sqrt(optctl::inner(g, d, d));
}

/// Initial-data identification by steepest descent.
/// Keys: as read_relax_setup, truth, guess, iterations, filter_every, bb
/// (bb1 | bb2 | fixed), sigma0, sigma_min, sigma_max, tolerance, save_every.
inline ControlResult run_control(const ExperimentConfig& cfg, const std::string& section,
                                 const RunContext& ctx) {
  SectionReader rd(cfg.section(section), section);
  rd.text("kind", "");
  ControlResult res;
  res.setup = read_relax_setup(rd);
  const auto& s = res.setup;
  const auto truth = read_profile(rd, "truth", s.model);
  const auto guess = read_profile(rd, "guess", s.model);
  optctl::DescentOptions opt;
  opt.iterations = rd.count("iterations", 30);
  opt.filter_every = static_cast<std::size_t>(rd.number("filter_every", 1.0));
  const std::string bb = rd.text("bb", "bb2");
  if (bb == "bb2") {
    opt.bb.variant = optctl::BBVariant::BB2;
  } else if (bb == "bb1") {
    opt.bb.variant = optctl::BBVariant::BB1;
  } else if (bb == "fixed") {
    opt.use_bb = false;
  } else {
    throw ConfigError(rd.where("bb") + ": must be bb1, bb2 or fixed");
  }
  opt.bb.sigma0 = rd.number("sigma0", 0.1);
  opt.bb.sigma_min = rd.number("sigma_min", 1e-6);
  opt.bb.sigma_max = rd.number("sigma_max", 1e2);
  opt.tolerance = rd.number("tolerance", 1e-8);
  const std::size_t save_every = rd.count("save_every", opt.iterations);
  rd.finish();
  if (!(opt.bb.sigma0 > 0.0) || !(opt.bb.sigma_min > 0.0) || opt.bb.sigma_max < opt.bb.sigma_min) {
    throw ConfigError(rd.where("sigma0") + ": need 0 < sigma_min <= sigma_max and sigma0 > 0");
  }

  res.truth = truth.sample(s.grid);
  res.guess = guess.sample(s.grid);
  if (s.model.characteristic) {
    relax::check_subcharacteristic(s.model, res.truth[0]);
    relax::check_subcharacteristic(s.model, res.guess[0]);
  }
  optctl::ControlProblem pb{s.model, s.grid, s.tableau, s.steps,
                            optctl::make_target(s.model, s.grid, s.tableau, s.steps, res.truth)};

  const auto& names = s.model.components;
  auto snap = [&](const std::string& what, std::size_t index, const relax::Macro& u) {
    relax::write_snapshot(relax::snapshot_path(ctx.out_dir, section + "_" + what, index), s.grid,
                          names, u);
  };
  snap("truth", 0, res.truth);
  snap("target", s.steps, pb.functional.target);

  res.result = optctl::optimize(
      pb, res.guess, opt, [&](const optctl::IterationRecord& r, const optctl::DescentState& st) {
        if (r.k % save_every == 0 || r.sigma == 0.0) snap("control", r.k, st.control);
      });
  snap("terminal", s.steps, res.result.terminal);

  Table log;
  log.header = {"k", "J", "sigma", "grad_inf_norm"};
  for (const auto& r : res.result.state.log) {
    log.rows.push_back({static_cast<double>(r.k), r.J, r.sigma, r.grad_inf_norm});
  }
  write_csv(ctx.out_dir / (section + "_log.csv"), log);
  if (ctx.log) {
    print_table(*ctx.log, section + ": " + s.model.name + " descent", log);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "J(final)/J(0) = %.4e, |u0 - truth| / |guess - truth| = %.4f, "
                  "max moment defect = %.3e\n\n",
                  res.result.state.log.back().J / res.result.state.log.front().J,
                  l2_distance(s.grid, res.result.state.control, res.truth) /
                      l2_distance(s.grid, res.guess, res.truth),
                  res.result.state.max_moment_defect);
    *ctx.log << buf;
  }
  return res;
}

/// Dispatches on the section's kind (defaults to the section name).
inline void run_experiment(const ExperimentConfig& cfg, const std::string& section,
                           const RunContext& ctx) {
  const std::string kind = experiment_kind(cfg, section);
  if (kind == "ode-converge") {
    run_ode_convergence(cfg, section, ctx);
  } else if (kind == "relax-forward") {
    run_relax_forward(cfg, section, ctx);
  } else if (kind == "relax-adjoint") {
    run_relax_adjoint(cfg, section, ctx);
  } else if (kind == "control-jinxin" || kind == "control-broadwell") {
    run_control(cfg, section, ctx);
  } else {
    throw ConfigError("[" + section + "] kind: unknown experiment '" + kind +
                      "' (ode-converge, relax-forward, relax-adjoint, control-jinxin, "
                      "control-broadwell)");
  }
}

}  // namespace lmmadj::cli
