#include <doctest.h>

#include "ddopt/state_solver.hpp"
#include "ddopt/verification.hpp"

#include <cmath>
#include <random>

using namespace ddopt;

namespace {

FlowData homogeneous_data(const Mesh& m) {
  FlowData data;
  data.transport_bc.components = 2;
  data.transport_bc.edges = m.boundary_edges();
  data.transport_bc.values = Vector::Zero(2 * static_cast<Eigen::Index>(m.boundary_edges().size()));
  return data;
}

struct Manufactured {
  ManufacturedCase mc = ManufacturedCase::make(Regime::flow);
  ProblemParams params = mc.params();
  P0Field control;
  FlowData data;

  explicit Manufactured(const Mesh& m) : control(m.num_cells(), 2), data(manufactured_flow_data(m, mc)) {
    control = p0_project(m, VectorFunction([this](const Vec2& x) { return Vec2(exact_eval(mc, "U", x)); }));
  }
};

}  // namespace

TEST_CASE("settings validation") {
  NonlinearSettings s;
  CHECK_NOTHROW(s.validate());
  s.tol = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.max_iter = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.damping = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("zero data gives the zero state") {
  const Mesh m = build_unit_square_mesh(4);
  for (auto method : {NonlinearSettings::Method::picard, NonlinearSettings::Method::newton}) {
    NonlinearSettings s;
    s.method = method;
    const StateSolution st = solve_state(m, ProblemParams{}, homogeneous_data(m), P0Field(m.num_cells(), 2), s);
    CHECK(st.iterations <= 2);
    CHECK(st.u.dof.norm() == 0.0);
    CHECK(st.p.dof.norm() == 0.0);
    CHECK(st.y.dof.norm() == 0.0);
  }
}

TEST_CASE("manufactured state on n = 16") {
  const Mesh m = build_unit_square_mesh(16);
  const Manufactured mf(m);
  const StateSolution st = solve_state(m, mf.params, mf.data, mf.control);
  CHECK(st.u.dof.allFinite());
  CHECK(cell_divergence(m, st.u).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(std::abs(mean_value(m, st.p)) < 1e-12);
  const double eu = cr_error(
      m, st.u, [&](const Vec2& x) { return exact_eval(mf.mc, "u", x); },
      [&](const Vec2& x) { return exact_gradient(mf.mc, "u", x); }, 1.0, 1.0);
  CHECK(eu < 0.5);

  const StateResidualNorms r = state_residual(m, mf.params, mf.data, st, mf.control);
  const double scale = 1.0 + st.u.dof.norm() + st.y.dof.norm();
  CHECK(r.momentum <= 1e-8 * scale);
  CHECK(r.divergence <= 1e-8 * scale);
  CHECK(r.transport <= 1e-8 * scale);

  // Newton and Picard land on the same discrete solution.
  NonlinearSettings newton;
  newton.method = NonlinearSettings::Method::newton;
  const StateSolution sn = solve_state(m, mf.params, mf.data, mf.control, newton);
  CHECK((sn.u.dof - st.u.dof).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((sn.y.dof - st.y.dof).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("Jacobian matches central differences of the residual") {
  const Mesh m = build_unit_square_mesh(4);
  const Manufactured mf(m);
  const StateOperator op(m, mf.params, mf.data);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> d(-1, 1);
  Vector x = op.initial_guess();
  for (int i : op.free_dofs()) x[i] = d(rng);
  const SparseMatrix j = op.jacobian(x);
  for (int trial = 0; trial < 3; ++trial) {
    Vector v = Vector::Zero(x.size());
    for (int i : op.free_dofs()) v[i] = d(rng);
    const double eps = 1e-6;
    const Vector fd = (op.residual(x + eps * v, mf.control) - op.residual(x - eps * v, mf.control)) / (2 * eps);
    const Vector jv = j * v;
    // Upwind switches make the residual only piecewise smooth; random
    // points are away from the kinks with probability one.
    CHECK((op.restrict_free(fd) - op.restrict_free(jv)).norm() <= 1e-6 * jv.norm());
  }
}

TEST_CASE("residual is affine in the pressure") {
  const Mesh m = build_unit_square_mesh(4);
  const Manufactured mf(m);
  const StateOperator op(m, mf.params, mf.data);
  const Vector x = op.initial_guess();
  const int dof = op.layout().pressure() + 3;
  Vector xp = x;
  xp[dof] += 1.0;
  const Vector diff = op.residual(xp, mf.control) - op.residual(x, mf.control);
  const Vector column = op.jacobian(x).col(dof);
  CHECK((diff - column).norm() < 1e-12 * (1.0 + column.norm()));
}

TEST_CASE("zero state with forcing: residual is the load") {
  const Mesh m = build_unit_square_mesh(4);
  FlowData data = homogeneous_data(m);
  data.momentum_source = [](const Vec2&) { return Vec2(1.0, -2.0); };
  const StateOperator op(m, ProblemParams{}, data);
  const Vector r = op.residual(op.initial_guess(), P0Field(m.num_cells(), 2));
  const Vector load = assemble_load(m, data.momentum_source);
  Vector expect = Vector::Zero(r.size());
  expect.head(load.size()) = -load;
  CHECK((op.restrict_free(r) - op.restrict_free(expect)).norm() < 1e-14);
}

TEST_CASE("flux-compatible boundary data") {
  const Mesh m = build_unit_square_mesh(5);
  const BoundaryTrace raw = boundary_interpolate(m, VectorFunction([](const Vec2& x) { return Vec2(1.0 + x.y(), 0.3); }));
  const BoundaryTrace fixed = flux_compatible(m, raw);
  double flux = 0.0;
  for (std::size_t i = 0; i < fixed.edges.size(); ++i) {
    const int e = fixed.edges[i];
    flux += m.edge_length(e) * Vec2(fixed.value(i, 0), fixed.value(i, 1)).dot(m.edge_normal(e));
  }
  CHECK(std::abs(flux) < 1e-14);
}

TEST_CASE("penalty needs pointwise velocity data") {
  const Mesh m = build_unit_square_mesh(3);
  ProblemParams params;
  params.penalty_a0 = 10.0;
  FlowData data = homogeneous_data(m);
  data.velocity_bc = boundary_interpolate(m, VectorFunction([](const Vec2&) { return Vec2(1.0, 0.0); }));
  CHECK_THROWS_AS(StateOperator(m, params, data), std::invalid_argument);
}

TEST_CASE("iteration budget is reported") {
  const Mesh m = build_unit_square_mesh(8);
  const Manufactured mf(m);
  NonlinearSettings s;
  s.max_iter = 1;
  try {
    solve_state(m, mf.params, mf.data, mf.control, s);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.history().size() == 1);
  }
}

TEST_CASE("state norms stay bounded under refinement") {
  std::vector<double> norms;
  Mesh m = build_unit_square_mesh(4);
  for (int level = 0; level < 3; ++level) {
    const Manufactured mf(m);
    const StateSolution st = solve_state(m, mf.params, mf.data, mf.control);
    norms.push_back(broken_h1_norm(m, st.u));
    m = refine_uniform(m);
  }
  CHECK(std::abs(norms[2] - norms[1]) < std::abs(norms[1] - norms[0]) + 1e-12);
  CHECK(norms[2] < 2.0 * norms[0]);
}
