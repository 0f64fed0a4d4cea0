#pragma once

#include "ddopt/state_solver.hpp"

namespace ddopt {

struct AdjointSolution {
  CRField phi;  // adjoint velocity
  P0Field xi;   // adjoint pressure, zero mean
  CRField eta;  // adjoint (T, S)
};

/// Desired states; an empty function means a zero target.
struct TrackingData {
  VectorFunction velocity;
  VectorFunction transport;
};

/// Solves the discrete adjoint system, the transpose of the state
/// linearization at `state`, with the tracking misfit as right-hand side.
AdjointSolution solve_adjoint(const Mesh& mesh, const ProblemParams& params, const FlowData& data,
                              const StateSolution& state, const TrackingData& tracking);

/// Same, reusing an LU factorization of the free-dof Jacobian at x.
AdjointSolution solve_adjoint(const StateOperator& op, const BorderedSolver& jacobian_lu, const Vector& x,
                              const TrackingData& tracking);

/// Derivative of the tracking terms of the cost with respect to the state
/// vector (full layout, zero on pressure and multiplier entries).
Vector tracking_gradient(const StateOperator& op, const StateSolution& state, const TrackingData& tracking);

/// 1/2 ||u - u_d||^2 + 1/2 ||y - y_d||^2 by cell quadrature.
double tracking_cost(const Mesh& mesh, const StateSolution& state, const TrackingData& tracking);

/// Cellwise L2 gradient of the reduced cost: lambda U_K + (cell average of phi)_K.
P0Field gradient_of_reduced_cost(const Mesh& mesh, const AdjointSolution& adjoint, const P0Field& control,
                                 double lambda);

}  // namespace ddopt
