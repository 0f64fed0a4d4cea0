#include "ddopt/control_opt.hpp"

#include "ddopt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ddopt {

int ActiveSets::count(int which) const {
  return static_cast<int>(std::count(label.begin(), label.end(), static_cast<std::int8_t>(which)));
}

P0Field project_control(const P0Field& v, double lambda, const ControlBounds& bounds) {
  if (!(lambda > 0.0)) throw std::invalid_argument("project_control: lambda must be positive");
  if (v.components != 2) throw std::invalid_argument("project_control: expected a 2-component field");
  P0Field u = v;
  for (int k = 0; k < v.num_cells(); ++k) {
    for (int j = 0; j < 2; ++j) {
      u(k, j) = std::max(bounds.lower[j], std::min(bounds.upper[j], -v(k, j) / lambda));
    }
  }
  return u;
}

ActiveSets classify_active_sets(const P0Field& v, double lambda, const ControlBounds& bounds) {
  ActiveSets sets;
  sets.label.resize(v.dof.size());
  for (int k = 0; k < v.num_cells(); ++k) {
    for (int j = 0; j < 2; ++j) {
      const double trial = -v(k, j) / lambda;
      std::int8_t l = 0;
      if (trial > bounds.upper[j]) {
        l = 1;
      } else if (trial < bounds.lower[j]) {
        l = -1;
      }
      sets.label[2 * k + j] = l;
    }
  }
  return sets;
}

double p0_l2_norm(const Mesh& mesh, const P0Field& field) {
  double sum = 0.0;
  for (int k = 0; k < field.num_cells(); ++k) {
    for (int c = 0; c < field.components; ++c) sum += mesh.cell_area(k) * field(k, c) * field(k, c);
  }
  return std::sqrt(sum);
}

double eval_cost(const Mesh& mesh, const StateSolution& state, const P0Field& control, const TrackingData& tracking,
                 double lambda) {
  const double u_norm = p0_l2_norm(mesh, control);
  return tracking_cost(mesh, state, tracking) + 0.5 * lambda * u_norm * u_norm;
}

double cost_difference(const Mesh& mesh, const StateSolution& state_a, const P0Field& control_a,
                       const StateSolution& state_b, const P0Field& control_b, const TrackingData& tracking,
                       double lambda) {
  auto target = [](const VectorFunction& f, const Vec2& x) { return f ? f(x) : Vec2(Vec2::Zero()); };
  auto value = [&](const CRField& f, int k, const std::array<double, 3>& b) {
    return Vec2(cell_value(mesh, f, k, b, 0), cell_value(mesh, f, k, b, 1));
  };
  long double sum = 0.0L;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double area = mesh.cell_area(k);
    for (const auto& q : cell_rule()) {
      const Vec2 x = cell_point(mesh, k, q.bary);
      const Vec2 ua = value(state_a.u, k, q.bary), ub = value(state_b.u, k, q.bary);
      const Vec2 ya = value(state_a.y, k, q.bary), yb = value(state_b.y, k, q.bary);
      const double term = (ua - ub).dot(ua + ub - 2.0 * target(tracking.velocity, x)) +
                          (ya - yb).dot(ya + yb - 2.0 * target(tracking.transport, x));
      sum += 0.5L * q.weight * area * term;
    }
    for (int c = 0; c < 2; ++c) {
      sum += 0.5L * lambda * area * (control_a(k, c) - control_b(k, c)) * (control_a(k, c) + control_b(k, c));
    }
  }
  return static_cast<double>(sum);
}

double vi_residual(const Mesh& mesh, const ProblemParams& params, const P0Field& control,
                   const AdjointSolution& adjoint) {
  const P0Field target = project_control(p0_project(mesh, adjoint.phi), params.tikhonov, params.bounds);
  return (control.dof - target.dof).cwiseAbs().maxCoeff();
}

namespace {

P0Field initial_control(const Mesh& mesh, const ControlBounds& bounds) {
  P0Field u(mesh.num_cells(), 2);
  for (int k = 0; k < mesh.num_cells(); ++k) {
    for (int j = 0; j < 2; ++j) u(k, j) = std::clamp(0.0, bounds.lower[j], bounds.upper[j]);
  }
  return u;
}

int set_changes(const ActiveSets& a, const ActiveSets& b) {
  int n = 0;
  for (std::size_t i = 0; i < a.label.size(); ++i) n += a.label[i] != b.label[i];
  return n;
}

}  // namespace

OptResult pdas_solve(const Mesh& mesh, const ProblemParams& params, const FlowData& data,
                     const TrackingData& tracking, const PdasSettings& settings) {
  params.validate();
  if (!(settings.tol > 0.0) || settings.max_iter < 1) throw std::invalid_argument("pdas_solve: invalid settings");
  const double lambda = params.tikhonov;
  const bool relative = settings.tol_mode == PdasSettings::Tolerance::relative;

  OptResult result;
  P0Field control = initial_control(mesh, params.bounds);
  ActiveSets previous = classify_active_sets(P0Field(mesh.num_cells(), 2), lambda, params.bounds);
  std::vector<double> set_change_history;

  const StateOperator op(mesh, params, data);
  Vector x = op.initial_guess();
  StateSolution state;
  bool have_state = false;

  for (int m = 1; m <= settings.max_iter; ++m) {
    AdjointSolution adjoint;
    double state_change = 0.0;
    double state_scale = 1.0;
    if (settings.mode == PdasSettings::Mode::nested) {
      state = solve_state(mesh, params, data, control, settings.state, have_state ? &state : nullptr);
      have_state = true;
      x = op.pack(state);
    }
    const BorderedSolver lu(op.restrict_free(op.jacobian(x)));
    adjoint = solve_adjoint(op, lu, x, tracking);

    const P0Field averaged = p0_project(mesh, adjoint.phi);
    const ActiveSets sets = classify_active_sets(averaged, lambda, params.bounds);
    const P0Field next = project_control(averaged, lambda, params.bounds);

    if (settings.mode == PdasSettings::Mode::newton_sweep) {
      // Newton step on the state with the updated control, reusing the
      // factorization the adjoint was solved with.
      Vector step = Vector::Zero(x.size());
      op.scatter_free(lu.solve(-op.restrict_free(op.residual(x, next))), step);
      x += step;
      if (!x.allFinite()) throw DivergedError("PDAS iteration " + std::to_string(m) + " diverged");
      const StateSolution inc = op.unpack(step);
      state = op.unpack(x);
      state_change = broken_h1_norm(mesh, inc.u) + broken_h1_norm(mesh, inc.y);
      state_scale = 1.0 + broken_h1_norm(mesh, state.u) + broken_h1_norm(mesh, state.y);
    }

    P0Field diff = next;
    diff.dof -= control.dof;
    const double change = p0_l2_norm(mesh, diff);
    const double reference = relative ? p0_l2_norm(mesh, next) : 1.0;

    result.cost_history.push_back(eval_cost(mesh, state, control, tracking, lambda));
    result.change_history.push_back(change);
    result.active_set_history.push_back(sets);
    set_change_history.push_back(set_changes(sets, previous));
    if (settings.on_iteration) settings.on_iteration(m, change, result.cost_history.back());

    const bool converged = sets == previous && change <= settings.tol * reference &&
                           state_change <= settings.tol * state_scale;
    previous = sets;
    control = next;
    if (converged) {
      // Final state and adjoint at the returned control, so that the
      // optimality residuals are measured on a consistent triple.
      state = solve_state(mesh, params, data, control, settings.state, &state);
      result.adjoint = solve_adjoint(mesh, params, data, state, tracking);
      result.state = state;
      result.control = control;
      result.iterations = m;
      return result;
    }
  }
  std::ostringstream msg;
  msg << "PDAS did not converge in " << settings.max_iter << " iterations";
  throw NonConvergenceError(msg.str(), set_change_history);
}

KktResiduals kkt_residuals(const Mesh& mesh, const ProblemParams& params, const FlowData& data,
                           const TrackingData& tracking, const OptResult& result) {
  const StateOperator op(mesh, params, data);
  const Vector x = op.pack(result.state);
  KktResiduals r;
  r.state_res = op.restrict_free(op.residual(x, result.control)).norm();

  StateSolution z;
  z.u = result.adjoint.phi;
  z.p = result.adjoint.xi;
  z.y = result.adjoint.eta;
  const Vector zf = op.restrict_free(op.pack(z));
  const SparseMatrix jf = op.restrict_free(op.jacobian(x));
  const Vector rhs = op.restrict_free(tracking_gradient(op, result.state, tracking));
  // The adjoint multiplier of the mean constraint is not stored; it
  // vanishes because the adjoint velocity is zero on the boundary.
  r.adjoint_res = (jf.transpose() * zf - rhs).norm();
  r.vi_res = vi_residual(mesh, params, result.control, result.adjoint);
  return r;
}

}  // namespace ddopt
