#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lmmadj/errors.hpp"
#include "lmmadj/lmm/bootstrap.hpp"
#include "lmmadj/lmm/history.hpp"
#include "lmmadj/lmm/step.hpp"
#include "lmmadj/lmm/tableau.hpp"
#include "lmmadj/lmm/time_grid.hpp"

using namespace lmmadj;
using lmm::Rational;

// Rationals are compared against Rational values only and inside extra
// parentheses: boost::rational's mixed comparisons recurse under C++20
// rewritten operators.

namespace {

// BDF(s) from the order conditions on t^q, q = 0..s, with nodes scaled so
// that t_{n+1} = 1 and t_{n-l} = -l:
//   1 + sum_l a_l (-l)^q = q * b_{-1}.
// Unknowns (a_0..a_{s-1}, b_{-1}); solved by exact Gauss-Jordan elimination.
std::vector<Rational> bdf_from_order_conditions(int s) {
  const int n = s + 1;
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n + 1));
  for (int q = 0; q <= s; ++q) {
    for (int l = 0; l < s; ++l) {
      Rational p{1};
      for (int k = 0; k < q; ++k) p *= Rational(-l);
      m[q][l] = p;
    }
    m[q][s] = Rational(-q);
    m[q][n] = Rational(-1);
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    while (m[piv][c] == Rational(0)) ++piv;
    std::swap(m[piv], m[c]);
    for (int r = 0; r < n; ++r) {
      if (r == c || m[r][c] == Rational(0)) continue;
      const Rational f = m[r][c] / m[c][c];
      for (int k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  std::vector<Rational> x(n);
  for (int i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
  return x;
}

// Brute-force check that sum_l a_l y(t_{n-l}) + y(t_{n+1}) - b y'(t_{n+1}) vanishes on t^q.
bool satisfies_order_conditions(const lmm::RationalTableau& t, int order) {
  const int s = static_cast<int>(t.stages());
  for (int q = 0; q <= order; ++q) {
    Rational r{1};
    for (int l = 0; l < s; ++l) {
      Rational p{1};
      for (int k = 0; k < q; ++k) p *= Rational(-l);
      r += t.a[l] * p;
    }
    for (int l = -1; l < s; ++l) {
      Rational dp = q == 0 ? Rational(0) : Rational(q);
      for (int k = 0; k + 1 < q; ++k) dp *= Rational(-l);
      r -= t.b[l + 1] * dp;
    }
    if (r != Rational(0)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("every tableau is consistent and has the right class", "[lmm]") {
  for (auto name : lmm::tableau_names()) {
    const auto t = lmm::tableau<double>(name);
    double sum = 1.0;
    for (std::size_t l = 0; l < t.stages(); ++l) sum += t.a(l);
    CHECK(std::abs(sum) <= 1e-14);
    CHECK((t.exact().consistency_defect() == Rational(0)));
    switch (t.scheme_class()) {
      case lmm::SchemeClass::Bdf: CHECK(t.is_bdf()); break;
      case lmm::SchemeClass::AdamsBashforth:
        CHECK(t.is_explicit());
        CHECK(t.is_adams());
        break;
      case lmm::SchemeClass::AdamsMoulton:
        CHECK_FALSE(t.is_explicit());
        CHECK(t.is_adams());
        break;
    }
  }
}

TEST_CASE("printed coefficients", "[lmm]") {
  const auto bdf2 = lmm::rational_tableau("BDF2");
  CHECK((bdf2.a == std::vector<Rational>{Rational(-4, 3), Rational(1, 3)}));
  CHECK((bdf2.b == std::vector<Rational>{Rational(2, 3), 0, 0}));

  const auto ab3 = lmm::rational_tableau("AB(3)");
  CHECK((ab3.a == std::vector<Rational>{-1, 0, 0}));
  CHECK((ab3.b == std::vector<Rational>{0, Rational(23, 12), Rational(-4, 3), Rational(5, 12)}));

  CHECK((lmm::rational_tableau("BDF1").a == lmm::rational_tableau("ImplicitEuler").a));
  CHECK_THROWS_AS(lmm::rational_tableau("RK4"), ConfigError);
}

TEST_CASE("BDF coefficients match the order-condition solution", "[lmm]") {
  for (int s = 1; s <= 6; ++s) {
    const auto oracle = bdf_from_order_conditions(s);
    const auto t = lmm::rational_tableau("BDF" + std::to_string(s));
    INFO("BDF" << s);
    for (int l = 0; l < s; ++l) CHECK((t.a[l] == oracle[l]));
    CHECK((t.b[0] == oracle[s]));
    CHECK(satisfies_order_conditions(t, s));
    CHECK_FALSE(satisfies_order_conditions(t, s + 1));
  }
}

TEST_CASE("Adams coefficients satisfy their order conditions", "[lmm]") {
  CHECK(satisfies_order_conditions(lmm::rational_tableau("ExplicitEuler"), 1));
  CHECK(satisfies_order_conditions(lmm::rational_tableau("AB2"), 2));
  CHECK(satisfies_order_conditions(lmm::rational_tableau("AB3"), 3));
  CHECK(satisfies_order_conditions(lmm::rational_tableau("AM4"), 5));
  CHECK_FALSE(satisfies_order_conditions(
      lmm::rational_tableau("AM4", lmm::AmDenominator::k270), 1));
}

TEST_CASE("time grid", "[lmm]") {
  const lmm::TimeGrid<double> g(0.0, 1.0, 8);
  CHECK(g.dt() == 0.125);
  CHECK(g.time(3) == 0.375);
  CHECK(g.time(-2) == -0.25);
  CHECK_THROWS_AS(lmm::TimeGrid<double>(1.0, 1.0, 4), ConfigError);
  CHECK_THROWS_AS(lmm::TimeGrid<double>(0.0, 1.0, 0), ConfigError);
}

TEST_CASE("history evicts the oldest entry", "[lmm]") {
  lmm::History<double> h(2);
  h.push(1, 10);
  CHECK_FALSE(h.warm());
  h.push(2, 20);
  h.push(3, 30);
  CHECK(h.warm());
  CHECK(h.size() == 2);
  CHECK(h.state(0) == 3);
  CHECK(h.state(1) == 2);
  CHECK(h.rhs(1) == 20);
}

TEST_CASE("single steps", "[lmm]") {
  auto lin = [](double y, double) { return y; };
  auto jac = [](double, double) { return 1.0; };

  SECTION("implicit Euler on y' = y") {
    const auto t = lmm::tableau<double>("ImplicitEuler");
    lmm::History<double> h(1);
    h.push(1.0, 1.0);
    CHECK(lmm::step(t, h, 0.1, 0.1, lin, jac) == Catch::Approx(1.0 / 0.9).epsilon(1e-13));
    CHECK(lmm::step(t, h, 0.1, 0.1, lin) == Catch::Approx(1.0 / 0.9).epsilon(1e-11));
  }

  SECTION("explicit Euler on y' = 0") {
    const auto t = lmm::tableau<double>("ExplicitEuler");
    lmm::History<double> h(1);
    h.push(3.25, 0.0);
    CHECK(lmm::step(t, h, 0.5, 0.5, [](double, double) { return 0.0; }) == 3.25);
  }

  SECTION("BDF2 local error is third order") {
    const auto t = lmm::tableau<double>("BDF2");
    auto rhs = [](double y, double) { return -y; };
    auto local_error = [&](double dt) {
      lmm::History<double> h(2);
      h.push(std::exp(dt), -std::exp(dt));
      h.push(1.0, -1.0);
      return std::abs(lmm::step(t, h, dt, dt, rhs, [](double, double) { return -1.0; }) -
                      std::exp(-dt));
    };
    const double e1 = local_error(0.01);
    const double e2 = local_error(0.005);
    CHECK(e1 < 0.01 * 0.01 * 0.01);
    CHECK(std::log2(e1 / e2) == Catch::Approx(3.0).margin(0.1));
  }

  SECTION("steps are deterministic") {
    const auto t = lmm::tableau<double>("BDF3");
    lmm::History<double> h(3);
    for (double y : {0.9, 0.95, 1.0}) h.push(y, y * y);
    auto rhs = [](double y, double) { return y * y; };
    auto j = [](double y, double) { return 2 * y; };
    const double a = lmm::step(t, h, 0.01, 0.01, rhs, j);
    const double b = lmm::step(t, h, 0.01, 0.01, rhs, j);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  }

  SECTION("solver failure reports residual and iterations") {
    const auto t = lmm::tableau<double>("ImplicitEuler");
    lmm::History<double> h(1);
    h.push(1.0, 1.0);
    lmm::ImplicitSolveOptions<double> opts{1e-12, 2};
    auto rhs = [](double y, double) { return 3 * y; };
    try {
      (void)lmm::step(t, h, 0.5, 0.5, rhs, lmm::NoJacobian{}, opts, 1);
      FAIL("expected SolverError");
    } catch (const SolverError& e) {
      CHECK(e.iterations() == 2);
      CHECK(e.residual() > 0);
    }
  }
}

TEST_CASE("history bootstrap", "[lmm]") {
  const lmm::TimeGrid<double> g(0.0, 0.5, 50);
  auto rhs = [](double y, double) { return y * y; };
  std::function<double(double)> exact = [](double t) { return 1.0 / (1.0 - t); };

  const auto one = lmm::bootstrap_states<double>(1, g, 1.0, rhs, lmm::InitMode::RkBootstrap);
  CHECK(one == std::vector<double>{1.0});

  const auto ex = lmm::bootstrap_states<double>(3, g, 1.0, rhs, lmm::InitMode::Exact, exact);
  for (int i = 0; i < 3; ++i) CHECK(ex[i] == exact((1 - 3 + i) * 0.01));

  const auto rk = lmm::bootstrap_states<double>(3, g, 1.0, rhs, lmm::InitMode::RkBootstrap);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(rk[i] - ex[i]) < 1e-8);

  CHECK_THROWS_AS(lmm::bootstrap_states<double>(3, g, 1.0, rhs, lmm::InitMode::Exact),
                  ConfigError);
}

TEST_CASE("observed order on y' = y matches the nominal order", "[lmm][order]") {
  using Real = long double;
  for (auto name : lmm::tableau_names()) {
    const auto tab = lmm::tableau<Real>(name);
    std::vector<Real> errs;
    for (int N : {40, 80, 160, 320, 640}) {
      const lmm::TimeGrid<Real> g(0, 1, static_cast<std::size_t>(N));
      auto rhs = [](Real y, Real) { return y; };
      std::function<Real(Real)> exact = [](Real t) { return std::exp(t); };
      auto hist = lmm::bootstrap_history(tab, g, Real(1), rhs, lmm::InitMode::Exact, exact);
      Real err = 0;
      for (int n = 0; n < N; ++n) {
        const Real y = lmm::step(tab, hist, g.dt(), g.time(n + 1), rhs,
                                 [](Real, Real) { return Real(1); });
        hist.push(y, y);
        err = std::max(err, std::abs(y - std::exp(g.time(n + 1))));
      }
      errs.push_back(err);
    }
    INFO(std::string(name));
    const std::vector<int> Ns{40, 80, 160, 320, 640};
    for (std::size_t k = 1; k < errs.size(); ++k) {
      // Pairs whose fine error sits at the accumulated roundoff level carry no order information.
      const Real floor = Real(100) * Ns[k] * std::numeric_limits<Real>::epsilon();
      if (errs[k] < floor) continue;
      INFO("pair " << k << " errors " << static_cast<double>(errs[k - 1]) << " "
                   << static_cast<double>(errs[k]));
      CHECK(std::log2(static_cast<double>(errs[k - 1] / errs[k])) >=
            tab.nominal_order() - 0.2);
    }
  }
}
