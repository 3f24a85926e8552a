#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lmmadj/optctl/descent.hpp"

using namespace lmmadj;
using namespace lmmadj::optctl;
using relax::Boundary;
using relax::FootMode;
using Catch::Approx;

namespace {

LagrangianGrid jx_grid(std::size_t nx) {
  LagrangianGrid g{-3.0, 3.0, nx, 0.0, Boundary::Periodic, FootMode::Aligned};
  g.dt = g.dx();
  return g;
}

Macro bump(const LagrangianGrid& g, double amp, double centre) {
  Macro u{std::vector<double>(g.points())};
  for (std::size_t i = 0; i < g.points(); ++i) {
    const double d = g.x(i) - centre;
    u[0][i] = amp * std::exp(-2.0 * d * d);
  }
  return u;
}

}  // namespace

TEST_CASE("tracking functional values", "[optctl][functional]") {
  const auto g = jx_grid(121);
  Macro u{std::vector<double>(g.points(), 0.3)};
  TrackingFunctional fn{u};
  CHECK(evaluate_functional(g, fn, u) == 0.0);
  for (auto& v : u[0]) v += 1.0;
  CHECK(evaluate_functional(g, fn, u) == Approx(3.0).epsilon(1e-14));

  LagrangianGrid c{-3.0, 3.0, 121, 0.05, Boundary::Clamp, FootMode::Aligned};
  Macro a{std::vector<double>(c.points(), 1.0), std::vector<double>(c.points(), 0.0)};
  Macro b{std::vector<double>(c.points(), 0.0), std::vector<double>(c.points(), 0.0)};
  CHECK(evaluate_functional(c, TrackingFunctional{b}, a) == Approx(3.0).epsilon(1e-14));

  CHECK_THROWS_AS(evaluate_functional(c, TrackingFunctional{b}, u), ConfigError);
  CHECK_THROWS_AS(evaluate_functional(g, fn, Macro{std::vector<double>(5)}), ConfigError);
}

TEST_CASE("tv filter", "[optctl][filter]") {
  for (auto bc : {Boundary::Periodic, Boundary::Clamp}) {
    const std::vector<double> flat(9, 0.7);
    for (double v : tv_filter(flat, bc)) CHECK(v == Approx(0.7).epsilon(1e-15));

    std::vector<double> spike(9, 0.0);
    spike[4] = 1.0;
    const auto f = tv_filter(spike, bc);
    CHECK(f[3] == 0.25);
    CHECK(f[4] == 0.5);
    CHECK(f[5] == 0.25);
    CHECK(total_variation(spike, bc) == 2.0);
    CHECK(total_variation(f, bc) == 1.0);
  }

  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> len(2, 60), pieces(1, 8);
  std::uniform_real_distribution<double> level(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto bc = trial % 2 ? Boundary::Periodic : Boundary::Clamp;
    std::vector<double> u(static_cast<std::size_t>(len(rng)));
    const int p = pieces(rng);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto piece = static_cast<int>(i * static_cast<std::size_t>(p) / u.size());
      if (i == 0 || static_cast<int>((i - 1) * static_cast<std::size_t>(p) / u.size()) != piece) {
        u[i] = level(rng);
      } else {
        u[i] = u[i - 1];
      }
    }
    CHECK(total_variation(tv_filter(u, bc), bc) <= total_variation(u, bc) + 1e-12);
  }
}

TEST_CASE("barzilai-borwein step", "[optctl][bb]") {
  const auto g = jx_grid(11);
  Macro du{std::vector<double>(g.points())};
  for (std::size_t i = 0; i < g.points(); ++i) du[0][i] = std::sin(static_cast<double>(i));
  Macro dg = du;
  CHECK(bb_step(g, du, dg, 0.1) == Approx(1.0));
  for (auto& v : dg[0]) v *= 2.0;
  CHECK(bb_step(g, du, dg, 0.1) == Approx(0.5));
  BBOptions bb1;
  bb1.variant = BBVariant::BB1;
  CHECK(bb_step(g, du, dg, 0.1, bb1) == Approx(0.5));

  Macro zero{std::vector<double>(g.points(), 0.0)};
  CHECK(bb_step(g, du, zero, 0.37) == 0.37);
  for (auto& v : dg[0]) v *= 1e9;
  CHECK(bb_step(g, du, dg, 0.1) == 1e-6);
  for (auto& v : dg[0]) v *= -1.0;
  CHECK(bb_step(g, du, dg, 0.1) == 1e-6);
  for (auto& v : dg[0]) v *= -1e-12;
  CHECK(bb_step(g, du, dg, 0.1) == 1e2);
}

TEST_CASE("gradient of a transport problem is the shifted residual", "[optctl][gradient]") {
  // F(u) = u with a = 1: lambda^1 is transported exactly and E'(u) = (1, 0).
  const auto g = jx_grid(121);
  const auto m = relax::make_jin_xin(relax::linear_flux(), 1.0, 1e-10);
  const auto tab = lmm::tableau<double>("BDF2");
  const std::size_t steps = 17;
  ControlProblem pb{m, g, tab, steps, {bump(g, 0.8, 0.5)}};
  const Macro u0 = bump(g, 0.5, 0.0);
  const auto cg = cost_and_gradient(pb, u0);
  const std::size_t M = g.points();
  for (std::size_t i = 0; i < M; ++i) {
    const std::size_t k = (i + steps) % M;
    CHECK(cg.gradient[0][i] ==
          Approx(cg.terminal[0][k] - pb.functional.target[0][k]).margin(1e-9));
  }
}

TEST_CASE("broadwell gradient matches finite differences", "[optctl][gradient]") {
  LagrangianGrid g{-1.0, 1.0, 33, 0.0, Boundary::Clamp, FootMode::Aligned};
  g.dt = 0.01;
  const auto m = relax::make_broadwell(g.dx() / g.dt, 0.05);
  const auto tab = lmm::tableau<double>("BDF2");
  const std::size_t steps = 8;
  Macro truth{std::vector<double>(g.points(), 1.0), std::vector<double>(g.points(), 0.0)};
  Macro guess = truth;
  for (std::size_t i = 0; i < g.points(); ++i) {
    const double x = g.x(i);
    truth[1][i] = 0.4 * std::sin(M_PI * x);
    truth[0][i] = 1.0 + 0.2 * std::exp(-8.0 * x * x);
    guess[1][i] = 0.1 * std::cos(M_PI * x);
  }
  ControlProblem pb{m, g, tab, steps, make_target(m, g, tab, steps, truth)};
  const auto cg = cost_and_gradient(pb, guess);
  double num = 0.0, den = 0.0;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t i = 0; i < g.points(); ++i) {
      const double h = 1e-6;
      auto up = guess, um = guess;
      up[r][i] += h;
      um[r][i] -= h;
      const double fd =
          (cost_and_gradient(pb, up).J - cost_and_gradient(pb, um).J) / (2 * h) / g.weight(i);
      num += (fd - cg.gradient[r][i]) * (fd - cg.gradient[r][i]);
      den += fd * fd;
    }
  }
  CHECK(std::sqrt(num / den) <= 0.05);
}

TEST_CASE("descent stops at once on the target", "[optctl][descent]") {
  const auto g = jx_grid(41);
  const auto m = relax::make_jin_xin(relax::burgers_flux(), 1.0, 1e-2);
  const auto tab = lmm::tableau<double>("BDF2");
  const auto truth = bump(g, 0.5, 0.0);
  ControlProblem pb{m, g, tab, 10, make_target(m, g, tab, 10, truth)};
  const auto res = optimize(pb, truth, DescentOptions{});
  REQUIRE(res.state.log.size() == 1);
  CHECK(res.state.log[0].k == 0);
  CHECK(res.state.log[0].J == 0.0);
  CHECK(res.state.log[0].grad_inf_norm == 0.0);
}

TEST_CASE("small fixed steps decrease J monotonically", "[optctl][descent]") {
  const auto g = jx_grid(41);
  const auto m = relax::make_jin_xin(relax::burgers_flux(), 1.0, 1e-2);
  const auto tab = lmm::tableau<double>("BDF2");
  ControlProblem pb{m, g, tab, 10, make_target(m, g, tab, 10, bump(g, 0.6, 0.3))};
  DescentOptions opt;
  opt.iterations = 20;
  opt.use_bb = false;
  opt.filter_every = 0;
  opt.bb.sigma0 = 0.2;
  const auto res = optimize(pb, bump(g, 0.3, -0.2), opt);
  REQUIRE(res.state.log.size() == 21);
  for (std::size_t k = 1; k < res.state.log.size(); ++k) {
    CHECK(res.state.log[k].J <= res.state.log[k - 1].J);
  }
  CHECK(res.state.log.back().J < 0.5 * res.state.log.front().J);
}

TEST_CASE("descent is deterministic and keeps steps in bounds", "[optctl][descent]") {
  const auto g = jx_grid(41);
  const auto m = relax::make_jin_xin(relax::burgers_flux(), 1.0, 1e-2);
  const auto tab = lmm::tableau<double>("BDF2");
  ControlProblem pb{m, g, tab, 10, make_target(m, g, tab, 10, bump(g, 0.6, 0.3))};
  DescentOptions opt;
  opt.iterations = 15;
  std::vector<IterationRecord> seen;
  const auto a = optimize(pb, bump(g, 0.3, -0.2), opt,
                          [&](const IterationRecord& r, const DescentState& st) {
                            CHECK(st.k == r.k);
                            seen.push_back(r);
                          });
  const auto b = optimize(pb, bump(g, 0.3, -0.2), opt);
  REQUIRE(a.state.log.size() == b.state.log.size());
  CHECK(seen.size() == a.state.log.size());
  for (std::size_t k = 0; k < a.state.log.size(); ++k) {
    CHECK(a.state.log[k].J == b.state.log[k].J);
    CHECK(a.state.log[k].sigma == b.state.log[k].sigma);
    if (k + 1 < a.state.log.size()) {
      CHECK(a.state.log[k].sigma >= 1e-6);
      CHECK(a.state.log[k].sigma <= 1e2);
    }
  }
  CHECK(a.state.control == b.state.control);
}

TEST_CASE("solver failures carry the iteration index", "[optctl][errors]") {
  LagrangianGrid g{-1.0, 1.0, 21, 0.0, Boundary::Clamp, FootMode::Aligned};
  g.dt = 0.02;
  const auto m = relax::make_broadwell(g.dx() / g.dt, 0.05);
  const auto tab = lmm::tableau<double>("BDF2");
  Macro ok{std::vector<double>(g.points(), 1.0), std::vector<double>(g.points(), 0.0)};
  ControlProblem pb{m, g, tab, 4, make_target(m, g, tab, 4, ok)};
  Macro bad = ok;
  bad[0][7] = -0.5;
  try {
    optimize(pb, bad, DescentOptions{});
    FAIL("expected a model error");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("descent iteration 0") != std::string::npos);
  }
}
