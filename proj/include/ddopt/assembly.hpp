#pragma once

#include "ddopt/fem_spaces.hpp"
#include "ddopt/params.hpp"

#include <vector>

namespace ddopt {

// Matrices act on interleaved CR dof vectors (see CRField). Rows index the
// test function, columns the trial function.

/// sum_K int_K K^{-1} u.v + nu(T) grad u : grad v, with T the first
/// component of `transport` sampled at the cell quadrature points.
SparseMatrix assemble_brinkman_diffusion(const Mesh& mesh, const CRField& transport, const ProblemParams& params);

/// Rows: pressure cells. Entry -int_K q div v.
SparseMatrix assemble_divergence(const Mesh& mesh);

/// int D grad y : grad s for two coupled scalar components.
SparseMatrix assemble_cross_diffusion(const Mesh& mesh, const Mat2& diffusion);

/// Upwinded convection by the frozen velocity `wind` acting on a field with
/// `components` components. The wind enters through its lowest-order
/// Raviart-Thomas reconstruction, whose normal component on each facet is
/// the single midpoint value, so the facet flux is single valued.
SparseMatrix assemble_upwind_advection(const Mesh& mesh, const CRField& wind, int components);

/// Derivative of assemble_upwind_advection(w) * field with respect to the
/// wind w (rows: field test space, columns: 2-component wind dofs). The
/// kink of the upwind flux is linearized with sign(w.n), sign(0) = 0.
SparseMatrix assemble_advection_linearization(const Mesh& mesh, const CRField& wind, const CRField& field);

/// d/dT of the viscous form: int nu'(T) dT grad u : grad v. Columns live in
/// the 2-component transport space; only temperature columns are filled.
SparseMatrix assemble_viscosity_coupling(const Mesh& mesh, const CRField& velocity, const CRField& transport,
                                         const ProblemParams& params);

/// int F_y(y) dy . v (momentum test rows, transport columns).
SparseMatrix assemble_buoyancy_jacobian(const Mesh& mesh, const CRField& transport, const ProblemParams& params);

/// int F(y) . v.
Vector assemble_buoyancy_load(const Mesh& mesh, const CRField& transport, const ProblemParams& params);

/// sum_e int_e (a0 nu2 / h_e) [u].[v] over all edges; the jump on a
/// boundary edge is the one-sided trace.
SparseMatrix assemble_jump_penalty(const Mesh& mesh, double a0, double nu2);

/// Boundary part of the penalty acting on prescribed data g.
Vector assemble_penalty_boundary_load(const Mesh& mesh, double a0, double nu2, const VectorFunction& g);

Vector assemble_load(const Mesh& mesh, const ScalarFunction& f);
Vector assemble_load(const Mesh& mesh, const VectorFunction& f);
/// (U, v) for a cellwise constant 2-component field.
Vector assemble_control_load(const Mesh& mesh, const P0Field& control);
/// Cell areas: c.p = sum_K |K| p_K.
Vector assemble_mean_constraint(const Mesh& mesh);
/// Diagonal CR mass matrix for a field with `components` components.
SparseMatrix assemble_cr_mass(const Mesh& mesh, int components);

/// Blocks of the adjoint system at a given state. Each block is the
/// transpose of the matching state-linearization block, so the adjoint
/// operator is the exact transpose of the linearized state operator.
struct AdjointBlocks {
  SparseMatrix convection;        // velocity convection, transposed
  SparseMatrix convection_slot;   // derivative in the advecting velocity, transposed
  SparseMatrix transport_slot;    // transport convection derivative in the velocity, transposed
  SparseMatrix viscosity;         // temperature-viscosity coupling, transposed
  SparseMatrix buoyancy;          // buoyancy Jacobian, transposed
  SparseMatrix transport;         // transport diffusion + convection, transposed
};
/// Throws std::invalid_argument if the state contains non-finite values.
AdjointBlocks assemble_adjoint_transport_terms(const Mesh& mesh, const ProblemParams& params,
                                               const CRField& velocity, const CRField& transport);

/// Threads used by the cell loops, from DDOPT_THREADS (default 1).
int assembly_threads();

}  // namespace ddopt
