#pragma once

#include "ddopt/adjoint_solver.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace ddopt {

/// Per cell and component: -1 lower bound active, 0 inactive, +1 upper bound active.
struct ActiveSets {
  std::vector<std::int8_t> label;

  bool operator==(const ActiveSets& other) const { return label == other.label; }
  int count(int which) const;
};

/// Componentwise max(lower, min(upper, -v / lambda)).
P0Field project_control(const P0Field& v, double lambda, const ControlBounds& bounds);

/// Classification of -v / lambda against the bounds; ties count as inactive.
ActiveSets classify_active_sets(const P0Field& v, double lambda, const ControlBounds& bounds);

double eval_cost(const Mesh& mesh, const StateSolution& state, const P0Field& control, const TrackingData& tracking,
                 double lambda);

/// eval_cost(a) - eval_cost(b), summed as (a - b)(a + b) / 2 term by term so
/// that nearby controls do not lose their difference to cancellation.
double cost_difference(const Mesh& mesh, const StateSolution& state_a, const P0Field& control_a,
                       const StateSolution& state_b, const P0Field& control_b, const TrackingData& tracking,
                       double lambda);

/// L2 norm of a cellwise field.
double p0_l2_norm(const Mesh& mesh, const P0Field& field);

struct PdasSettings {
  enum class Tolerance { absolute, relative };
  enum class Mode {
    /// Fully converged state and adjoint solves between control updates.
    nested,
    /// One Newton step on the state per control update, with the adjoint
    /// taken from the transpose of the same factorization.
    newton_sweep,
  };
  double tol = 1e-6;
  Tolerance tol_mode = Tolerance::absolute;
  int max_iter = 50;
  Mode mode = Mode::nested;
  NonlinearSettings state;
  /// Optional progress callback: (iteration, control change, cost).
  std::function<void(int, double, double)> on_iteration;
};

struct OptResult {
  P0Field control;
  StateSolution state;
  AdjointSolution adjoint;
  int iterations = 0;
  std::vector<double> cost_history;
  std::vector<double> change_history;
  std::vector<ActiveSets> active_set_history;
};

/// Primal-dual active set iteration on the discrete optimality system.
/// Throws NonConvergenceError (history: number of set changes per
/// iteration) when max_iter is exhausted.
OptResult pdas_solve(const Mesh& mesh, const ProblemParams& params, const FlowData& data,
                     const TrackingData& tracking, const PdasSettings& settings = {});

struct KktResiduals {
  double state_res = 0.0;
  double adjoint_res = 0.0;
  double vi_res = 0.0;
};

/// Residuals of the discrete optimality system at (state, adjoint, control).
KktResiduals kkt_residuals(const Mesh& mesh, const ProblemParams& params, const FlowData& data,
                           const TrackingData& tracking, const OptResult& result);

/// max over cells/components of |U - P(-avg(phi) / lambda)|.
double vi_residual(const Mesh& mesh, const ProblemParams& params, const P0Field& control,
                   const AdjointSolution& adjoint);

}  // namespace ddopt
