#pragma once

#include "ddopt/assembly.hpp"
#include "ddopt/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ddopt {

/// Offsets of the unknown blocks in the monolithic state vector
/// [velocity (2E) | pressure (N) | transport (2E) | mean multiplier (1)].
struct StateLayout {
  int num_edges = 0;
  int num_cells = 0;

  explicit StateLayout(const Mesh& mesh) : num_edges(mesh.num_edges()), num_cells(mesh.num_cells()) {}
  int velocity() const { return 0; }
  int pressure() const { return 2 * num_edges; }
  int transport() const { return 2 * num_edges + num_cells; }
  int multiplier() const { return 4 * num_edges + num_cells; }
  int size() const { return 4 * num_edges + num_cells + 1; }
};

/// Boundary data and body forces of the state equation.
struct FlowData {
  /// Velocity edge averages on boundary edges; boundary edges not listed
  /// get zero velocity.
  BoundaryTrace velocity_bc;
  /// Pointwise velocity boundary data, used by the jump penalty only.
  VectorFunction velocity_bc_function;
  /// Dirichlet values of (T, S); edges not listed carry natural conditions.
  BoundaryTrace transport_bc;
  VectorFunction momentum_source;
  VectorFunction transport_source;
};

struct StateSolution {
  CRField u;   // velocity
  P0Field p;   // pressure, zero mean
  CRField y;   // (T, S)
  int iterations = 0;
  std::vector<double> increments;
};

struct NonlinearSettings {
  enum class Method { picard, newton };
  /// Increment tolerance, relative to 1 + ||u|| + ||y|| in the broken norm.
  double tol = 1e-10;
  int max_iter = 100;
  double damping = 1.0;
  Method method = Method::picard;

  void validate() const;
};

/// The discrete state operator R(x, U) = 0 together with its Jacobian and
/// its frozen-coefficient (Picard) linearization. Dirichlet dofs are kept
/// in the vector and removed through the free-dof map.
class StateOperator {
 public:
  StateOperator(const Mesh& mesh, const ProblemParams& params, const FlowData& data);

  const Mesh& mesh() const { return mesh_; }
  const ProblemParams& params() const { return params_; }
  const StateLayout& layout() const { return layout_; }
  const std::vector<int>& free_dofs() const { return free_; }
  const std::vector<int>& fixed_dofs() const { return fixed_; }

  /// Zero vector carrying the Dirichlet values.
  Vector initial_guess() const;
  /// Overwrite the Dirichlet entries of x with the prescribed values.
  void apply_dirichlet(Vector& x) const;

  Vector residual(const Vector& x, const P0Field& control) const;
  SparseMatrix jacobian(const Vector& x) const;
  SparseMatrix picard_matrix(const Vector& x) const;
  Vector picard_rhs(const Vector& x, const P0Field& control) const;

  Vector restrict_free(const Vector& full) const;
  void scatter_free(const Vector& free_values, Vector& full) const;
  SparseMatrix restrict_free(const SparseMatrix& full) const;

  StateSolution unpack(const Vector& x) const;
  Vector pack(const StateSolution& s) const;

 private:
  CRField velocity_of(const Vector& x) const;
  CRField transport_of(const Vector& x) const;
  // Constant-coefficient parts plus the state-dependent diagonal blocks.
  std::vector<Triplet> frozen_triplets(const Vector& x) const;
  Vector fixed_loads(const P0Field& control) const;

  const Mesh& mesh_;
  ProblemParams params_;
  StateLayout layout_;
  std::vector<int> free_;
  std::vector<int> fixed_;
  Vector fixed_values_;  // full-size vector, nonzero only on fixed dofs
  SparseMatrix divergence_;
  SparseMatrix transport_diffusion_;
  SparseMatrix penalty_;
  Vector mean_row_;
  Vector momentum_load_;
  Vector transport_load_;
};

/// Solve the nonlinear state equation for a given control.
/// Throws NonConvergenceError (with the increment history) or DivergedError.
StateSolution solve_state(const Mesh& mesh, const ProblemParams& params, const FlowData& data,
                          const P0Field& control, const NonlinearSettings& settings = {},
                          const StateSolution* warm_start = nullptr);

struct StateResidualNorms {
  double momentum = 0.0;
  double divergence = 0.0;
  double transport = 0.0;
  double mean = 0.0;
};

/// Euclidean norms of the discrete residual blocks over the free dofs.
StateResidualNorms state_residual(const Mesh& mesh, const ProblemParams& params, const FlowData& data,
                                  const StateSolution& solution, const P0Field& control);

/// Boundary velocity data with the net boundary flux removed, so that the
/// discrete divergence constraint is solvable with div u_h = 0 exactly.
BoundaryTrace flux_compatible(const Mesh& mesh, const BoundaryTrace& velocity_bc);

}  // namespace ddopt
