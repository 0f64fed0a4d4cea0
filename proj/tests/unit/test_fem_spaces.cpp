#include <doctest.h>

#include "ddopt/fem_spaces.hpp"
#include "ddopt/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace ddopt;

namespace {

int edge_with_midpoint(const Mesh& m, const Vec2& mid) {
  for (int e = 0; e < m.num_edges(); ++e) {
    if ((m.edge_midpoint(e) - mid).norm() < 1e-12) return e;
  }
  return -1;
}

}  // namespace

TEST_CASE("CR interpolation is the edge average") {
  const Mesh m = build_unit_square_mesh(1);
  const int bottom = edge_with_midpoint(m, Vec2(0.5, 0.0));
  REQUIRE(bottom >= 0);
  CHECK(interpolate_cr(m, ScalarFunction([](const Vec2& x) { return x.x(); }))(bottom) == doctest::Approx(0.5));
  CHECK(interpolate_cr(m, ScalarFunction([](const Vec2& x) { return x.x() * x.x(); }))(bottom) ==
        doctest::Approx(1.0 / 3.0));
  const CRField c = interpolate_cr(m, ScalarFunction([](const Vec2&) { return 2.5; }));
  for (int e = 0; e < m.num_edges(); ++e) CHECK(c(e) == doctest::Approx(2.5));
}

TEST_CASE("CR basis: Kronecker property and partition of unity") {
  const Mesh m = build_unit_square_mesh(2);
  for (int k = 0; k < m.num_cells(); ++k) {
    for (int j = 0; j < 3; ++j) {
      const Vec2 mid = m.edge_midpoint(m.cell_edge(k, j));
      const auto bary = barycentric(m, k, mid);
      double sum = 0.0;
      for (int i = 0; i < 3; ++i) {
        CHECK(cr_basis(bary, i) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        sum += cr_basis(bary, i);
      }
      CHECK(sum == doctest::Approx(1.0));
    }
    const auto g = cr_gradients(m, k);
    CHECK((g[0] + g[1] + g[2]).norm() < 1e-12);
  }
}

TEST_CASE("constant fields and affine reproduction") {
  const Mesh m = build_unit_square_mesh(3);
  CRField c(m.num_edges(), 1);
  c.dof.setConstant(-1.5);
  const ScalarFunction affine = [](const Vec2& x) { return 2.0 * x.x() - 3.0 * x.y() + 0.25; };
  const CRField a = interpolate_cr(m, affine);
  for (int k = 0; k < m.num_cells(); ++k) {
    const Vec2 x = m.centroid(k);
    CHECK(evaluate_cr(m, c, k, x) == doctest::Approx(-1.5));
    CHECK(gradient_cr(m, c, k).norm() < 1e-12);
    CHECK(evaluate_cr(m, a, k, x) == doctest::Approx(affine(x)));
    CHECK((gradient_cr(m, a, k) - Vec2(2.0, -3.0)).norm() < 1e-12);
    // Any point of the cell, not only midpoints.
    const Vec2 y = cell_point(m, k, {0.7, 0.2, 0.1});
    CHECK(evaluate_cr(m, a, k, y) == doctest::Approx(affine(y)));
  }
  CHECK_THROWS_AS(evaluate_cr(m, a, 0, Vec2(2.0, 2.0)), std::invalid_argument);
}

TEST_CASE("interpolation is idempotent") {
  const Mesh m = build_unit_square_mesh(4);
  const CRField f = interpolate_cr(m, ScalarFunction([](const Vec2& x) { return std::sin(3 * x.x()) * x.y(); }));
  // Re-interpolating the piecewise linear field reproduces its dofs, since
  // edge averages of a linear function are midpoint values.
  const CRField g = interpolate_cr(m, ScalarFunction([&](const Vec2& x) {
    for (int k = 0; k < m.num_cells(); ++k) {
      const auto b = barycentric(m, k, x);
      if (b[0] > 1e-9 && b[1] > 1e-9 && b[2] > 1e-9) return evaluate_cr(m, f, k, x);
    }
    // On an edge both neighbours agree at the Gauss points only on average;
    // use the plus cell.
    for (int k = 0; k < m.num_cells(); ++k) {
      const auto b = barycentric(m, k, x);
      if (b[0] > -1e-12 && b[1] > -1e-12 && b[2] > -1e-12) return evaluate_cr(m, f, k, x);
    }
    return 0.0;
  }));
  CHECK((g.dof - f.dof).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("boundary interpolation") {
  const Mesh m = build_unit_square_mesh(4);
  const BoundaryTrace ones = boundary_interpolate(m, ScalarFunction([](const Vec2&) { return 1.0; }));
  CHECK(ones.edges.size() == m.boundary_edges().size());
  for (std::size_t i = 0; i < ones.edges.size(); ++i) CHECK(ones.value(i) == doctest::Approx(1.0));

  // T = 0.5 + 0.5 cos(xy) equals 1 along y = 0.
  const BoundaryTrace t = boundary_interpolate(
      m, ScalarFunction([](const Vec2& x) { return 0.5 + 0.5 * std::cos(x.x() * x.y()); }),
      [&](int e) { return std::abs(m.edge_midpoint(e).y()) < 1e-12; });
  CHECK(t.edges.size() == 4);
  for (std::size_t i = 0; i < t.edges.size(); ++i) CHECK(t.value(i) == doctest::Approx(1.0));

  const BoundaryTrace right = boundary_interpolate(m, ScalarFunction([](const Vec2&) { return -1.0; }),
                                                   [&](int e) { return std::abs(m.edge_midpoint(e).x() - 1) < 1e-12; });
  CHECK(right.edges.size() == 4);
  for (std::size_t i = 0; i < right.edges.size(); ++i) CHECK(right.value(i) == -1.0);
}

TEST_CASE("P0 projection") {
  const Mesh m = build_unit_square_mesh(3);
  const P0Field c = p0_project(m, ScalarFunction([](const Vec2&) { return 4.0; }));
  const P0Field x = p0_project(m, ScalarFunction([](const Vec2& p) { return p.x(); }));
  for (int k = 0; k < m.num_cells(); ++k) {
    CHECK(c(k) == doctest::Approx(4.0));
    CHECK(x(k) == doctest::Approx(m.centroid(k).x()));
  }
}

TEST_CASE("P0 projection error decays at first order") {
  const ScalarFunction f = [](const Vec2& p) { return std::sin(std::numbers::pi * p.x()); };
  std::vector<double> err;
  for (int n : {8, 16, 32}) {
    const Mesh m = build_unit_square_mesh(n);
    const P0Field pf = p0_project(m, f);
    double s = 0.0;
    for (int k = 0; k < m.num_cells(); ++k) {
      for (const auto& q : cell_rule()) {
        const double d = f(cell_point(m, k, q.bary)) - pf(k);
        s += q.weight * m.cell_area(k) * d * d;
      }
    }
    err.push_back(std::sqrt(s));
  }
  CHECK(std::log2(err[1] / err[2]) > 0.95);
  CHECK(std::log2(err[0] / err[1]) > 0.95);
}

TEST_CASE("cell quadrature is exact for degree 4") {
  const Mesh m = build_unit_square_mesh(1);
  // Monomials x^a y^b with a + b <= 4 integrated over the unit square.
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; a + b <= 4; ++b) {
      double s = 0.0;
      for (int k = 0; k < m.num_cells(); ++k) {
        for (const auto& q : cell_rule()) {
          const Vec2 x = cell_point(m, k, q.bary);
          s += q.weight * m.cell_area(k) * std::pow(x.x(), a) * std::pow(x.y(), b);
        }
      }
      CHECK(s == doctest::Approx(1.0 / ((a + 1) * (b + 1))).epsilon(1e-13));
    }
  }
  double w = 0.0;
  for (const auto& q : cell_rule()) w += q.weight;
  CHECK(w == doctest::Approx(1.0));
}

TEST_CASE("edge quadrature is exact for cubics") {
  const auto& s = edge_rule_abscissae();
  for (int d = 0; d <= 3; ++d) {
    const double v = 0.5 * (std::pow(s[0], d) + std::pow(s[1], d));
    CHECK(v == doctest::Approx(1.0 / (d + 1)));
  }
}

TEST_CASE("cell divergence, mean value and broken norm") {
  const Mesh m = build_unit_square_mesh(4);
  const CRField u = interpolate_cr(m, VectorFunction([](const Vec2& x) { return Vec2(x.x(), 2.0 * x.y()); }));
  const Vector div = cell_divergence(m, u);
  for (int k = 0; k < m.num_cells(); ++k) CHECK(div[k] == doctest::Approx(3.0));

  P0Field p = p0_project(m, ScalarFunction([](const Vec2& x) { return 1.0 + x.x(); }));
  CHECK(mean_value(m, p) == doctest::Approx(1.5));
  zero_mean(m, p);
  CHECK(std::abs(mean_value(m, p)) < 1e-14);

  CRField c(m.num_edges(), 2);
  c.dof.setConstant(2.0);
  // ||c||_0^2 = 4 per component on the unit square, gradient zero.
  CHECK(broken_h1_norm(m, c) == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("P0 average of a CR field is the centroid value") {
  const Mesh m = build_unit_square_mesh(3);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1, 1);
  CRField f(m.num_edges(), 1);
  for (int i = 0; i < f.dof.size(); ++i) f.dof[i] = d(rng);
  const P0Field avg = p0_project(m, f);
  for (int k = 0; k < m.num_cells(); ++k) CHECK(avg(k) == doctest::Approx(evaluate_cr(m, f, k, m.centroid(k))));
}
