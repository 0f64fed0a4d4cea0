#pragma once

#include "ddopt/types.hpp"

#include <memory>

namespace ddopt {

// Compressed sparse storage used throughout. Eigen's compressed column
// format; the assembled systems are handed to the factorization as is.
using CompressedMatrix = SparseMatrix;

/// Sparse LU factorization with fill-reducing ordering. Immutable after
/// construction and reusable for any number of right-hand sides, with
/// either A or its transpose.
class DirectSolver {
 public:
  DirectSolver();
  /// Throws SingularMatrixError carrying the offending pivot column.
  explicit DirectSolver(const CompressedMatrix& a);
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;
  DirectSolver(const DirectSolver&) = delete;
  DirectSolver& operator=(const DirectSolver&) = delete;

  Vector solve(const Vector& b) const;
  Vector solve_transpose(const Vector& b) const;
  int size() const { return n_; }
  bool factorized() const { return impl_ != nullptr; }

  /// Name of the backing factorization library.
  static const char* backend();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

/// Factorization of a matrix whose last row and column form a dense
/// border (a Lagrange multiplier for a mean-value constraint):
///
///   [ K   b ] [x]   [f]
///   [ c^T 0 ] [m] = [g]
///
/// K alone is assumed singular with its kernel and cokernel both spanned by
/// the indicator of the support of b (= support of c). Factoring such a
/// border directly ruins the fill-reducing ordering, so the solver factors
/// the sparse matrix where b and c are replaced by a single unit entry and
/// recovers the exact bordered solution by a rank-one correction. Falls
/// back to factoring the whole matrix when the border is not of that form.
class BorderedSolver {
 public:
  explicit BorderedSolver(const CompressedMatrix& a);

  Vector solve(const Vector& rhs) const;
  Vector solve_transpose(const Vector& rhs) const;
  int size() const { return n_; }
  /// True when the pinned factorization is in use.
  bool pinned() const { return pin_ >= 0; }

 private:
  Vector solve_impl(const Vector& rhs, bool transpose) const;

  DirectSolver lu_;
  Vector col_, row_;  // border column b and row c (without the corner)
  std::vector<int> support_;
  int pin_ = -1;
  int n_ = 0;
};

Vector solve_direct(const CompressedMatrix& a, const Vector& b);

/// ||Ax - b|| / ||b|| (or ||Ax|| when b = 0).
double relative_residual(const CompressedMatrix& a, const Vector& x, const Vector& b);

/// Extract rows/columns listed in `rows`/`cols` (in that order).
SparseMatrix extract_submatrix(const SparseMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace ddopt
