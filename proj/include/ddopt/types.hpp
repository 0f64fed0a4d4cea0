#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddopt {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

using ScalarFunction = std::function<double(const Vec2&)>;
using VectorFunction = std::function<Vec2(const Vec2&)>;

/// Raised by the direct solver when factorization meets a zero pivot.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, long pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  long pivot() const { return pivot_; }

 private:
  long pivot_;
};

/// Raised when an iteration exhausts its budget. Carries the per-iteration
/// history of the monitored quantity (increments, set changes, ...).
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Raised when an iterate contains NaN or Inf.
class DivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ddopt
