#include "ddopt/state_solver.hpp"

#include <cmath>
#include <sstream>

namespace ddopt {

namespace {

void append_block(std::vector<Triplet>& t, const SparseMatrix& m, int row_offset, int col_offset, double scale = 1.0) {
  for (int j = 0; j < m.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
      t.emplace_back(row_offset + static_cast<int>(it.row()), col_offset + static_cast<int>(it.col()),
                     scale * it.value());
    }
  }
}

SparseMatrix build(int n, const std::vector<Triplet>& t) {
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

void NonlinearSettings::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("nonlinear tolerance must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("damping must lie in (0, 1]");
}

BoundaryTrace flux_compatible(const Mesh& mesh, const BoundaryTrace& velocity_bc) {
  BoundaryTrace out = velocity_bc;
  if (velocity_bc.edges.empty()) return out;
  if (velocity_bc.components != 2) throw std::invalid_argument("velocity boundary data needs two components");
  double flux = 0.0, length = 0.0;
  for (std::size_t i = 0; i < velocity_bc.edges.size(); ++i) {
    const int e = velocity_bc.edges[i];
    const Vec2 v(velocity_bc.value(i, 0), velocity_bc.value(i, 1));
    flux += mesh.edge_length(e) * v.dot(mesh.edge_normal(e));
    length += mesh.edge_length(e);
  }
  const double correction = flux / length;
  for (std::size_t i = 0; i < out.edges.size(); ++i) {
    const Vec2& n = mesh.edge_normal(out.edges[i]);
    out.values[2 * static_cast<Eigen::Index>(i)] -= correction * n.x();
    out.values[2 * static_cast<Eigen::Index>(i) + 1] -= correction * n.y();
  }
  return out;
}

StateOperator::StateOperator(const Mesh& mesh, const ProblemParams& params, const FlowData& data)
    : mesh_(mesh), params_(params), layout_(mesh) {
  params_.validate();
  const int n = layout_.size();
  fixed_values_ = Vector::Zero(n);
  std::vector<char> is_fixed(n, 0);

  for (int e : mesh.boundary_edges()) {
    is_fixed[2 * e] = is_fixed[2 * e + 1] = 1;
  }
  const BoundaryTrace vel = flux_compatible(mesh, data.velocity_bc);
  for (std::size_t i = 0; i < vel.edges.size(); ++i) {
    const int e = vel.edges[i];
    if (!mesh.is_boundary(e)) throw std::invalid_argument("velocity data given on an interior edge");
    fixed_values_[2 * e] = vel.value(i, 0);
    fixed_values_[2 * e + 1] = vel.value(i, 1);
  }
  const BoundaryTrace& tr = data.transport_bc;
  if (!tr.edges.empty() && tr.components != 2) throw std::invalid_argument("transport data needs two components");
  for (std::size_t i = 0; i < tr.edges.size(); ++i) {
    const int e = tr.edges[i];
    if (!mesh.is_boundary(e)) throw std::invalid_argument("transport data given on an interior edge");
    for (int c = 0; c < 2; ++c) {
      is_fixed[layout_.transport() + 2 * e + c] = 1;
      fixed_values_[layout_.transport() + 2 * e + c] = tr.value(i, c);
    }
  }
  for (int i = 0; i < n; ++i) (is_fixed[i] ? fixed_ : free_).push_back(i);

  divergence_ = assemble_divergence(mesh);
  transport_diffusion_ = assemble_cross_diffusion(mesh, params_.diffusion);
  penalty_ = assemble_jump_penalty(mesh, params_.penalty_a0, params_.nu2());
  mean_row_ = assemble_mean_constraint(mesh);

  momentum_load_ = Vector::Zero(2 * mesh.num_edges());
  if (data.momentum_source) momentum_load_ += assemble_load(mesh, data.momentum_source);
  if (params_.penalty_a0 > 0.0) {
    VectorFunction g = data.velocity_bc_function;
    if (!g && !vel.edges.empty()) {
      throw std::invalid_argument("the jump penalty needs pointwise velocity boundary data");
    }
    if (g) momentum_load_ += assemble_penalty_boundary_load(mesh, params_.penalty_a0, params_.nu2(), g);
  }
  transport_load_ = Vector::Zero(2 * mesh.num_edges());
  if (data.transport_source) transport_load_ += assemble_load(mesh, data.transport_source);
}

Vector StateOperator::initial_guess() const { return fixed_values_; }

void StateOperator::apply_dirichlet(Vector& x) const {
  for (int i : fixed_) x[i] = fixed_values_[i];
}

CRField StateOperator::velocity_of(const Vector& x) const {
  CRField u(layout_.num_edges, 2);
  u.dof = x.segment(layout_.velocity(), 2 * layout_.num_edges);
  return u;
}

CRField StateOperator::transport_of(const Vector& x) const {
  CRField y(layout_.num_edges, 2);
  y.dof = x.segment(layout_.transport(), 2 * layout_.num_edges);
  return y;
}

std::vector<Triplet> StateOperator::frozen_triplets(const Vector& x) const {
  const CRField u = velocity_of(x);
  const CRField y = transport_of(x);
  const SparseMatrix convection = assemble_upwind_advection(mesh_, u, 2);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(40) * layout_.num_edges * 4);
  append_block(t, assemble_brinkman_diffusion(mesh_, y, params_), 0, 0);
  append_block(t, convection, 0, 0);
  append_block(t, penalty_, 0, 0);
  append_block(t, SparseMatrix(divergence_.transpose()), 0, layout_.pressure());
  append_block(t, divergence_, layout_.pressure(), 0);
  append_block(t, transport_diffusion_, layout_.transport(), layout_.transport());
  append_block(t, convection, layout_.transport(), layout_.transport());
  for (int k = 0; k < layout_.num_cells; ++k) {
    t.emplace_back(layout_.pressure() + k, layout_.multiplier(), mean_row_[k]);
    t.emplace_back(layout_.multiplier(), layout_.pressure() + k, mean_row_[k]);
  }
  return t;
}

Vector StateOperator::fixed_loads(const P0Field& control) const {
  Vector b = Vector::Zero(layout_.size());
  b.segment(layout_.velocity(), 2 * layout_.num_edges) = momentum_load_ + assemble_control_load(mesh_, control);
  b.segment(layout_.transport(), 2 * layout_.num_edges) = transport_load_;
  return b;
}

Vector StateOperator::residual(const Vector& x, const P0Field& control) const {
  const SparseMatrix k0 = build(layout_.size(), frozen_triplets(x));
  Vector r = k0 * x - fixed_loads(control);
  r.segment(layout_.velocity(), 2 * layout_.num_edges) -= assemble_buoyancy_load(mesh_, transport_of(x), params_);
  return r;
}

SparseMatrix StateOperator::jacobian(const Vector& x) const {
  const CRField u = velocity_of(x);
  const CRField y = transport_of(x);
  std::vector<Triplet> t = frozen_triplets(x);
  append_block(t, assemble_advection_linearization(mesh_, u, u), 0, 0);
  append_block(t, assemble_viscosity_coupling(mesh_, u, y, params_), 0, layout_.transport());
  append_block(t, assemble_buoyancy_jacobian(mesh_, y, params_), 0, layout_.transport(), -1.0);
  append_block(t, assemble_advection_linearization(mesh_, u, y), layout_.transport(), 0);
  return build(layout_.size(), t);
}

SparseMatrix StateOperator::picard_matrix(const Vector& x) const {
  std::vector<Triplet> t = frozen_triplets(x);
  if (params_.buoyancy.affine) {
    append_block(t, assemble_buoyancy_jacobian(mesh_, transport_of(x), params_), 0, layout_.transport(), -1.0);
  }
  return build(layout_.size(), t);
}

Vector StateOperator::picard_rhs(const Vector& x, const P0Field& control) const {
  Vector b = fixed_loads(control);
  // Affine buoyancy: only the offset F(0) stays on the right-hand side.
  const CRField y = params_.buoyancy.affine ? CRField(layout_.num_edges, 2) : transport_of(x);
  b.segment(layout_.velocity(), 2 * layout_.num_edges) += assemble_buoyancy_load(mesh_, y, params_);
  return b;
}

Vector StateOperator::restrict_free(const Vector& full) const {
  Vector out(static_cast<Eigen::Index>(free_.size()));
  for (std::size_t i = 0; i < free_.size(); ++i) out[static_cast<Eigen::Index>(i)] = full[free_[i]];
  return out;
}

void StateOperator::scatter_free(const Vector& free_values, Vector& full) const {
  for (std::size_t i = 0; i < free_.size(); ++i) full[free_[i]] = free_values[static_cast<Eigen::Index>(i)];
}

SparseMatrix StateOperator::restrict_free(const SparseMatrix& full) const {
  return extract_submatrix(full, free_, free_);
}

StateSolution StateOperator::unpack(const Vector& x) const {
  StateSolution s;
  s.u = velocity_of(x);
  s.p = P0Field(layout_.num_cells, 1);
  s.p.dof = x.segment(layout_.pressure(), layout_.num_cells);
  s.y = transport_of(x);
  return s;
}

Vector StateOperator::pack(const StateSolution& s) const {
  Vector x = Vector::Zero(layout_.size());
  x.segment(layout_.velocity(), 2 * layout_.num_edges) = s.u.dof;
  x.segment(layout_.pressure(), layout_.num_cells) = s.p.dof;
  x.segment(layout_.transport(), 2 * layout_.num_edges) = s.y.dof;
  return x;
}

StateSolution solve_state(const Mesh& mesh, const ProblemParams& params, const FlowData& data,
                          const P0Field& control, const NonlinearSettings& settings,
                          const StateSolution* warm_start) {
  settings.validate();
  const StateOperator op(mesh, params, data);
  Vector x = warm_start ? op.pack(*warm_start) : op.initial_guess();
  op.apply_dirichlet(x);

  std::vector<double> history;
  for (int it = 1; it <= settings.max_iter; ++it) {
    Vector step = Vector::Zero(x.size());
    if (settings.method == NonlinearSettings::Method::picard) {
      const SparseMatrix k = op.picard_matrix(x);
      Vector target = x;
      op.scatter_free(BorderedSolver(op.restrict_free(k)).solve(op.restrict_free(op.picard_rhs(x, control) -
                                                                               k * op.initial_guess())),
                      target);
      op.apply_dirichlet(target);
      step = target - x;
    } else {
      const Vector r = op.residual(x, control);
      const Vector delta = BorderedSolver(op.restrict_free(op.jacobian(x))).solve(-op.restrict_free(r));
      op.scatter_free(delta, step);
    }
    x += settings.damping * step;
    if (!x.allFinite()) {
      throw DivergedError("state iteration " + std::to_string(it) + " produced non-finite values");
    }

    const StateSolution cur = op.unpack(x);
    const StateSolution inc = op.unpack(settings.damping * step);
    const double increment = broken_h1_norm(mesh, inc.u) + broken_h1_norm(mesh, inc.y);
    const double scale = 1.0 + broken_h1_norm(mesh, cur.u) + broken_h1_norm(mesh, cur.y);
    history.push_back(increment);
    if (increment <= settings.tol * scale) {
      StateSolution out = cur;
      out.iterations = it;
      out.increments = std::move(history);
      return out;
    }
  }
  std::ostringstream msg;
  msg << "state solver did not converge in " << settings.max_iter << " iterations (last increment "
      << (history.empty() ? 0.0 : history.back()) << ")";
  throw NonConvergenceError(msg.str(), history);
}

StateResidualNorms state_residual(const Mesh& mesh, const ProblemParams& params, const FlowData& data,
                                  const StateSolution& solution, const P0Field& control) {
  const StateOperator op(mesh, params, data);
  const Vector r = op.residual(op.pack(solution), control);
  const StateLayout& l = op.layout();
  StateResidualNorms norms;
  for (int i : op.free_dofs()) {
    const double v = r[i] * r[i];
    if (i < l.pressure()) {
      norms.momentum += v;
    } else if (i < l.transport()) {
      norms.divergence += v;
    } else if (i < l.multiplier()) {
      norms.transport += v;
    } else {
      norms.mean += v;
    }
  }
  norms.momentum = std::sqrt(norms.momentum);
  norms.divergence = std::sqrt(norms.divergence);
  norms.transport = std::sqrt(norms.transport);
  norms.mean = std::sqrt(norms.mean);
  return norms;
}

}  // namespace ddopt
