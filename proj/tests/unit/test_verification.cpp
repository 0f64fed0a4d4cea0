#include <doctest.h>

#include "ddopt/verification.hpp"

#include <cmath>
#include <random>

using namespace ddopt;

TEST_CASE("regime names") {
  for (Regime r : {Regime::flow, Regime::stokes, Regime::darcy}) CHECK(parse_regime(regime_name(r)) == r);
  CHECK_THROWS_AS(parse_regime("brinkman"), std::invalid_argument);
}

TEST_CASE("closed-form values") {
  const ManufacturedCase mc = ManufacturedCase::make(Regime::flow);
  CHECK(exact_eval(mc, "T", Vec2(0, 0))[0] == doctest::Approx(1.0));
  CHECK(exact_eval(mc, "S", Vec2(0, 0))[0] == doctest::Approx(0.4));
  CHECK(exact_eval(mc, "p", Vec2(0, 0))[0] == doctest::Approx(1.0));
  CHECK(exact_eval(mc, "u", Vec2(0.5, 0.5)).norm() < 1e-15);
  CHECK_THROWS_AS(exact_eval(mc, "w", Vec2(0, 0)), std::invalid_argument);

  // Adjoint fields vanish on the boundary; the velocity is solenoidal.
  for (double t : {0.0, 0.3, 0.71, 1.0}) {
    for (const Vec2& x : {Vec2(t, 0), Vec2(t, 1), Vec2(0, t), Vec2(1, t)}) {
      CHECK(exact_eval(mc, "phi", x).norm() < 1e-14);
      CHECK(exact_eval(mc, "eta", x).norm() < 1e-14);
    }
    const Vec2 x(t, 0.37);
    CHECK(std::abs(exact_gradient(mc, "u", x).trace()) < 1e-14);
    CHECK(std::abs(exact_gradient(mc, "phi", x).trace()) < 1e-13);
  }
}

TEST_CASE("exact gradients agree with differences of the values") {
  const ManufacturedCase mc = ManufacturedCase::make(Regime::flow);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> d(0.05, 0.95);
  const double h = 1e-6;
  for (const char* name : {"u", "p", "T", "S", "phi", "zeta", "etaT", "etaS"}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Vec2 x(d(rng), d(rng));
      const Eigen::MatrixXd g = exact_gradient(mc, name, x);
      for (int dir = 0; dir < 2; ++dir) {
        const Vec2 e = h * Vec2::Unit(dir);
        const Eigen::VectorXd fd = (exact_eval(mc, name, x + e) - exact_eval(mc, name, x - e)) / (2 * h);
        CHECK((fd - g.col(dir)).norm() <= 1e-7 * (1.0 + g.norm()));
      }
    }
  }
}

TEST_CASE("exact control is the projected adjoint") {
  const ManufacturedCase mc = ManufacturedCase::make(Regime::flow);
  const Vec2 x(0.3, 0.6);
  const Eigen::VectorXd phi = exact_eval(mc, "phi", x);
  const Eigen::VectorXd u = exact_eval(mc, "U", x);
  for (int j = 0; j < 2; ++j) {
    CHECK(u[j] == doctest::Approx(std::clamp(-phi[j] / mc.lambda, mc.bounds.lower[j], mc.bounds.upper[j])));
  }
}

TEST_CASE("regime coefficients") {
  CHECK(ManufacturedCase::make(Regime::darcy).penalty_a0 > 0.0);
  CHECK(ManufacturedCase::make(Regime::flow).penalty_a0 == 0.0);
  CHECK_NOTHROW(ManufacturedCase::make(Regime::stokes).params().validate());
}

TEST_CASE("error norms on simple fields") {
  const Mesh m = build_unit_square_mesh(4);
  const CRField zero(m.num_edges(), 1);
  const double c = -2.5;
  const double e = cr_error(
      m, zero, [&](const Vec2&) { return Eigen::VectorXd::Constant(1, c); },
      [](const Vec2&) { return Eigen::MatrixXd::Zero(1, 2); }, 1.0, 1.0);
  CHECK(e == doctest::Approx(std::abs(c)));
  const P0Field p(m.num_cells(), 1);
  CHECK(p0_error(m, p, 0, [](const Vec2&) { return 1.0; }, 4.0 / 3.0) == doctest::Approx(1.0));
  CHECK(p0_error(m, p, 0, [](const Vec2&) { return 3.0; }) == doctest::Approx(3.0));
}

TEST_CASE("observed order") {
  const std::vector<double> hs{0.4, 0.2, 0.1};
  auto r = eoc({1.0, 0.5, 0.25}, hs);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(1.0));
  r = eoc({1.0, 0.25, 0.0625}, hs);
  CHECK(r[1] == doctest::Approx(2.0));
  r = eoc({1.0, 1.0, 1.0}, hs);
  CHECK(r[1] == doctest::Approx(0.0));
  CHECK_THROWS_AS(eoc({1.0, 0.5}, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("small convergence study") {
  StudySettings s;
  s.coarse_n = 4;
  int calls = 0;
  s.on_level = [&](int, const Mesh&, const OptResult&) { ++calls; };
  const ConvergenceReport rep = run_convergence_study(Regime::flow, 3, s);
  CHECK(calls == 3);
  REQUIRE(rep.levels.size() == 3);
  CHECK(rep.levels[2].n == 16);
  for (const std::string& name : ConvergenceReport::error_names()) {
    const auto errs = rep.column(name);
    CHECK(errs.back() < errs.front());
    CHECK(rep.rates(name).back() > 0.5);
  }
  for (const auto& level : rep.levels) CHECK(level.max_div <= 1e-10);
}
