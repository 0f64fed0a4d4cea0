#include "ddopt/adjoint_solver.hpp"

#include "ddopt/quadrature.hpp"

namespace ddopt {

namespace {

Vec2 target(const VectorFunction& f, const Vec2& x) { return f ? f(x) : Vec2::Zero(); }

Vec2 cell_vec(const Mesh& mesh, const CRField& field, int k, const std::array<double, 3>& bary) {
  return {cell_value(mesh, field, k, bary, 0), cell_value(mesh, field, k, bary, 1)};
}

}  // namespace

Vector tracking_gradient(const StateOperator& op, const StateSolution& state, const TrackingData& tracking) {
  const Mesh& mesh = op.mesh();
  const StateLayout& l = op.layout();
  Vector g = Vector::Zero(l.size());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double area = mesh.cell_area(k);
    for (const auto& q : cell_rule()) {
      const Vec2 x = cell_point(mesh, k, q.bary);
      const Vec2 du = cell_vec(mesh, state.u, k, q.bary) - target(tracking.velocity, x);
      const Vec2 dy = cell_vec(mesh, state.y, k, q.bary) - target(tracking.transport, x);
      for (int i = 0; i < 3; ++i) {
        const double w = q.weight * area * cr_basis(q.bary, i);
        const int e = mesh.cell_edge(k, i);
        g[l.velocity() + 2 * e] += w * du.x();
        g[l.velocity() + 2 * e + 1] += w * du.y();
        g[l.transport() + 2 * e] += w * dy.x();
        g[l.transport() + 2 * e + 1] += w * dy.y();
      }
    }
  }
  return g;
}

double tracking_cost(const Mesh& mesh, const StateSolution& state, const TrackingData& tracking) {
  double j = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double area = mesh.cell_area(k);
    for (const auto& q : cell_rule()) {
      const Vec2 x = cell_point(mesh, k, q.bary);
      const Vec2 du = cell_vec(mesh, state.u, k, q.bary) - target(tracking.velocity, x);
      const Vec2 dy = cell_vec(mesh, state.y, k, q.bary) - target(tracking.transport, x);
      j += 0.5 * q.weight * area * (du.squaredNorm() + dy.squaredNorm());
    }
  }
  return j;
}

AdjointSolution solve_adjoint(const StateOperator& op, const BorderedSolver& jacobian_lu, const Vector& x,
                              const TrackingData& tracking) {
  const StateSolution state = op.unpack(x);
  const Vector rhs = op.restrict_free(tracking_gradient(op, state, tracking));
  Vector z = Vector::Zero(op.layout().size());
  op.scatter_free(jacobian_lu.solve_transpose(rhs), z);
  const StateSolution parts = op.unpack(z);
  return {parts.u, parts.p, parts.y};
}

AdjointSolution solve_adjoint(const Mesh& mesh, const ProblemParams& params, const FlowData& data,
                              const StateSolution& state, const TrackingData& tracking) {
  if (state.u.components != 2 || state.u.num_edges() != mesh.num_edges() || state.y.num_edges() != mesh.num_edges()) {
    throw std::invalid_argument("solve_adjoint: state does not match the mesh");
  }
  if (!state.u.dof.allFinite() || !state.y.dof.allFinite() || !state.p.dof.allFinite()) {
    throw std::invalid_argument("solve_adjoint: state contains non-finite values");
  }
  const StateOperator op(mesh, params, data);
  const Vector x = op.pack(state);
  const BorderedSolver lu(op.restrict_free(op.jacobian(x)));
  return solve_adjoint(op, lu, x, tracking);
}

P0Field gradient_of_reduced_cost(const Mesh& mesh, const AdjointSolution& adjoint, const P0Field& control,
                                 double lambda) {
  P0Field g = p0_project(mesh, adjoint.phi);
  g.dof += lambda * control.dof;
  return g;
}

}  // namespace ddopt
