#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <functional>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/ode/adjoint.hpp"
#include "lmmadj/ode/convergence.hpp"
#include "lmmadj/ode/forward.hpp"
#include "lmmadj/ode/problems.hpp"

using namespace lmmadj;
using ode::AdjointRoute;
using ode::BuiltinProblem;
using ode::TerminalMode;

namespace {

template <class R>
ode::Trajectory<R> zero_control_run(BuiltinProblem kind, const char* scheme, R T, std::size_t N,
                                    ode::OdeControlProblem<R>& pb) {
  pb = ode::make_builtin<R>(kind, T);
  return ode::builtin_trajectory(kind, pb, lmm::tableau<R>(scheme), lmm::TimeGrid<R>(0, T, N));
}

// A nonlinear test problem with a smooth nonzero control.
ode::OdeControlProblem<double> wobble_problem() {
  ode::OdeControlProblem<double> p;
  p.f = [](double y, double u, double t) { return std::sin(y) + u * std::cos(t); };
  p.f_y = [](double y, double, double) { return std::cos(y); };
  p.f_u = [](double, double, double t) { return std::cos(t); };
  p.j = [](double y) { return 0.5 * y * y; };
  p.j_y = [](double y) { return y; };
  p.alpha = 0.5;
  p.y0 = 0.3;
  p.y_exact = [](double t) { return 0.3 + 0.1 * t; };
  p.p_exact = [](double t) { return 1.0 + t * t; };
  return p;
}

double smooth_control(double t) { return 0.4 * std::sin(3.0 * t) + 0.1; }

}  // namespace

TEST_CASE("constant solution stays constant", "[ode]") {
  ode::OdeControlProblem<double> p;
  p.f = [](double, double, double) { return 0.0; };
  p.f_y = p.f;
  p.f_u = p.f;
  p.j = [](double y) { return y; };
  p.j_y = [](double) { return 1.0; };
  p.y0 = 2.5;
  p.y_exact = [](double) { return 2.5; };
  for (auto name : lmm::tableau_names()) {
    const auto tab = lmm::tableau<double>(name);
    const lmm::TimeGrid<double> g(0, 1, 16);
    const auto tr = ode::solve_forward(p, tab, g, ode::sample_controls(g, tab.stages(), [](double) {
                                         return 0.0;
                                       }));
    for (std::ptrdiff_t n = 0; n <= 16; ++n) CHECK(tr.y(n) == Catch::Approx(2.5).epsilon(1e-14));
  }
}

TEST_CASE("forward solve of y' = y^2 with BDF", "[ode]") {
  using R = long double;
  ode::OdeControlProblem<R> pb;

  const auto bdf4 = zero_control_run<R>(BuiltinProblem::Riccati, "BDF4", 0.875L, 1280, pb);
  CHECK(ode::state_error(bdf4, pb.y_exact) <= 6e-8L);

  const auto bdf3 = zero_control_run<R>(BuiltinProblem::Riccati, "BDF3", 0.875L, 320, pb);
  CHECK(static_cast<double>(ode::state_error(bdf3, pb.y_exact)) ==
        Catch::Approx(2.07256e-4).epsilon(0.15));
}

TEST_CASE("RK bootstrap agrees with exact history", "[ode]") {
  auto pb = ode::riccati_problem<double>(0.5, 1.0);
  const auto tab = lmm::tableau<double>("BDF3");
  const lmm::TimeGrid<double> g(0, 0.5, 50);
  const auto u = ode::sample_controls(g, 3, [](double) { return 0.0; });
  ode::ForwardOptions<double> rk;
  rk.init = lmm::InitMode::RkBootstrap;
  const auto a = ode::solve_forward(pb, tab, g, u);
  const auto b = ode::solve_forward(pb, tab, g, u, rk);
  for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(std::abs(a.states[k] - b.states[k]) < 1e-7);
}

TEST_CASE("constant f_y gives bit-identical routes", "[ode]") {
  for (auto name : lmm::tableau_names()) {
    ode::OdeControlProblem<double> pb;
    const auto tr = zero_control_run<double>(BuiltinProblem::ConstantFy, name.data(), 1.0, 80, pb);
    const auto tab = lmm::tableau<double>(name);
    const auto d = ode::solve_adjoint_dto(pb, tab, tr, TerminalMode::Exact);
    const auto o = ode::solve_adjoint_otd(pb, tab, tr, TerminalMode::Exact);
    INFO(std::string(name));
    CHECK(std::memcmp(d.p.data(), o.p.data(), d.p.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("zero dynamics keep the terminal value", "[ode]") {
  ode::OdeControlProblem<double> p = wobble_problem();
  p.f_y = [](double, double, double) { return 0.0; };
  for (auto name : lmm::tableau_names()) {
    const auto tab = lmm::tableau<double>(name);
    const lmm::TimeGrid<double> g(0, 1, 20);
    const auto tr = ode::prescribed_trajectory(g, tab.stages(), p.y_exact, smooth_control);
    const auto o = ode::solve_adjoint_otd(p, tab, tr);
    for (double v : o.p) CHECK(v == Catch::Approx(o.p.back()).epsilon(1e-14));
  }
}

TEST_CASE("adjoint errors on the reference problems", "[ode]") {
  ode::OdeControlProblem<double> pb;

  SECTION("AM4 with constant f_y") {
    const auto tr = zero_control_run<double>(BuiltinProblem::ConstantFy, "AM4", 1.0, 640, pb);
    const auto o = ode::solve_adjoint_otd(pb, lmm::tableau<double>("AM4"), tr, TerminalMode::Exact);
    CHECK(ode::adjoint_error(o, pb.p_exact) <= 1e-13);
  }

  SECTION("explicit Euler with f_y = t^2 converges at first order") {
    std::vector<double> err;
    for (std::size_t N : {320, 640}) {
      const auto tr = zero_control_run<double>(BuiltinProblem::QuadraticFy, "ExplicitEuler", 1.0, N, pb);
      err.push_back(ode::adjoint_error(
          ode::solve_adjoint_otd(pb, lmm::tableau<double>("ExplicitEuler"), tr, TerminalMode::Exact),
          pb.p_exact));
    }
    CHECK(ode::observed_rate(err[0], err[1]) == Catch::Approx(1.0).margin(0.05));
  }

  SECTION("BDF4 with f_y = t^2: routes agree and reach 1e-10") {
    const auto tab = lmm::tableau<double>("BDF4");
    const auto tr = zero_control_run<double>(BuiltinProblem::QuadraticFy, "BDF4", 1.0, 640, pb);
    const auto d = ode::solve_adjoint_dto(pb, tab, tr, TerminalMode::Exact);
    const auto o = ode::solve_adjoint_otd(pb, tab, tr, TerminalMode::Exact);
    CHECK(ode::adjoint_error(d, pb.p_exact) <= 1e-10);
    for (std::size_t i = 0; i < d.p.size(); ++i) {
      CHECK(std::abs(d.p[i] - o.p[i]) <= 1e-12 * std::abs(o.p[i]));
    }
  }
}

TEST_CASE("BDF routes coincide for a shared terminal block", "[ode]") {
  const auto pb = wobble_problem();
  for (const char* name : {"ImplicitEuler", "BDF2", "BDF3", "BDF4", "BDF5", "BDF6"}) {
    const auto tab = lmm::tableau<double>(name);
    const lmm::TimeGrid<double> g(0, 1, 50);
    const auto tr = ode::solve_forward(pb, tab, g, ode::sample_controls(g, tab.stages(), smooth_control));
    const auto d = ode::solve_adjoint_dto(pb, tab, tr, TerminalMode::Exact);
    const auto o = ode::solve_adjoint_otd(pb, tab, tr, TerminalMode::Exact);
    INFO(name);
    for (std::size_t i = 0; i < d.p.size(); ++i) {
      CHECK(std::abs(d.p[i] - o.p[i]) <= 1e-12 * std::abs(o.p[i]));
    }
  }
}

TEST_CASE("BDF routes with their own terminal data agree to the scheme order", "[ode]") {
  using R = long double;
  for (const char* name : {"BDF3", "BDF4"}) {
    const auto tab = lmm::tableau<R>(name);
    std::vector<double> diff;
    for (std::size_t N : {320, 640, 1280}) {
      ode::OdeControlProblem<R> pb;
      const auto tr = zero_control_run<R>(BuiltinProblem::Riccati, name, 0.875L, N, pb);
      const auto d = ode::solve_adjoint_dto(pb, tab, tr);
      const auto o = ode::solve_adjoint_otd(pb, tab, tr);
      R m = 0;
      for (std::size_t i = 0; i < d.p.size(); ++i) m = std::max(m, std::abs(d.p[i] - o.p[i]));
      diff.push_back(static_cast<double>(m));
    }
    INFO(name);
    CHECK(ode::observed_rate(diff[1], diff[2]) >= tab.nominal_order() - 0.3);
  }
}

TEST_CASE("optimality residual", "[ode]") {
  SECTION("zero control and zero adjoint") {
    ode::OdeControlProblem<double> pb;
    const auto tr = zero_control_run<double>(BuiltinProblem::Riccati, "BDF2", 0.5, 40, pb);
    ode::AdjointTrajectory<double> adj{tr.grid, AdjointRoute::OptimizeThenDiscretize,
                                       std::vector<double>(41, 0.0)};
    for (double r : ode::optimality_residual(pb, tr, adj, lmm::tableau<double>("BDF2"))) CHECK(r == 0.0);
  }

  SECTION("alpha = 1, p = 0, u = 1") {
    auto pb = ode::riccati_problem<double>(0.5, 1.0);
    const lmm::TimeGrid<double> g(0, 0.5, 10);
    const auto tr = ode::prescribed_trajectory(g, 2, pb.y_exact, [](double) { return 1.0; });
    ode::AdjointTrajectory<double> adj{g, AdjointRoute::OptimizeThenDiscretize,
                                       std::vector<double>(11, 0.0)};
    for (double r : ode::optimality_residual(pb, tr, adj, lmm::tableau<double>("BDF2"))) CHECK(r == 1.0);
  }
}

TEST_CASE("DtO residual is the gradient of the discrete cost", "[ode]") {
  auto pb = ode::riccati_problem<double>(0.5, 1.0);
  for (const char* name : {"ExplicitEuler", "AB3", "AM4", "BDF2", "BDF4"}) {
    const auto tab = lmm::tableau<double>(name);
    const lmm::TimeGrid<double> g(0, 0.5, 10);
    const auto u = ode::sample_controls(g, tab.stages(), smooth_control);
    const auto tr = ode::solve_forward(pb, tab, g, u);
    const auto grad = ode::optimality_residual(pb, tr, ode::solve_adjoint_dto(pb, tab, tr), tab);
    INFO(name);
    for (std::ptrdiff_t i = 0; i <= 10; ++i) {
      const double h = 1e-5;
      auto up = u;
      auto um = u;
      up[tr.index(i)] += h;
      um[tr.index(i)] -= h;
      const double fd = (ode::discrete_cost(pb, ode::solve_forward(pb, tab, g, up)) -
                         ode::discrete_cost(pb, ode::solve_forward(pb, tab, g, um))) /
                        (2 * h);
      CHECK(std::abs(grad[static_cast<std::size_t>(i)] - fd) <= 1e-6 * std::abs(fd) + 1e-12);
    }
  }
}

TEST_CASE("adjoint error reporting", "[ode]") {
  auto pb = wobble_problem();
  const auto tab = lmm::tableau<double>("BDF2");
  const lmm::TimeGrid<double> g(0, 1, 10);
  const auto tr = ode::prescribed_trajectory(g, 2, pb.y_exact, smooth_control);
  CHECK_THROWS_AS(ode::solve_adjoint_dto(pb, tab, tr, TerminalMode::RkBackward), ConfigError);

  pb.f_y = [](double, double, double) { return 15.0; };  // dt * b_{-1} * f_y = 1
  CHECK_THROWS_AS(ode::solve_adjoint_dto(pb, tab, tr), SolverError);

  auto blow = ode::riccati_problem<double>(0.5, 1.0);
  blow.f = [](double y, double, double) { return std::exp(y * y); };
  blow.f_y = [](double y, double, double) { return 2 * y * std::exp(y * y); };
  const auto ab = lmm::tableau<double>("ExplicitEuler");
  const lmm::TimeGrid<double> g2(0, 5, 10);
  CHECK_THROWS_AS(ode::solve_forward(blow, ab, g2, ode::sample_controls(g2, 1, smooth_control)),
                  SolverError);
}

TEST_CASE("RK backward terminal block is high order", "[ode]") {
  ode::OdeControlProblem<double> pb;
  const auto tab = lmm::tableau<double>("BDF4");
  std::vector<double> err;
  for (std::size_t N : {80, 160}) {
    const auto tr = zero_control_run<double>(BuiltinProblem::QuadraticFy, "BDF4", 1.0, N, pb);
    err.push_back(ode::adjoint_error(ode::solve_adjoint_otd(pb, tab, tr, TerminalMode::RkBackward),
                                     pb.p_exact));
  }
  CHECK(ode::observed_rate(err[0], err[1]) >= 3.7);
}
