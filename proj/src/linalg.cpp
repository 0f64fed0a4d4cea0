#include "ddopt/linalg.hpp"

#include <string>
#include <vector>

#ifdef DDOPT_HAVE_UMFPACK
#include <umfpack.h>
#else
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#endif

namespace ddopt {

#ifdef DDOPT_HAVE_UMFPACK

struct DirectSolver::Impl {
  SparseMatrix a;  // owns the arrays UMFPACK reads during solves
  void* numeric = nullptr;
  double control[UMFPACK_CONTROL];

  ~Impl() {
    if (numeric != nullptr) umfpack_di_free_numeric(&numeric);
  }

  Vector solve(const Vector& b, int sys) const {
    Vector x(b.size());
    double info[UMFPACK_INFO];
    const int status = umfpack_di_solve(sys, a.outerIndexPtr(), a.innerIndexPtr(), a.valuePtr(), x.data(), b.data(),
                                        numeric, control, info);
    if (status < 0) throw std::runtime_error("UMFPACK solve failed with status " + std::to_string(status));
    return x;
  }
};

namespace {

// Column of the first zero pivot in the factorization, in the original
// column numbering.
long zero_pivot_column(void* numeric, int n) {
  std::vector<double> diag(n);
  std::vector<int> q(n);
  int do_recip = 0;
  if (umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, q.data(), diag.data(),
                             &do_recip, nullptr, numeric) != UMFPACK_OK) {
    return -1;
  }
  for (int k = 0; k < n; ++k) {
    if (diag[k] == 0.0) return q[k];
  }
  return -1;
}

}  // namespace

DirectSolver::DirectSolver(const CompressedMatrix& a) : impl_(std::make_unique<Impl>()), n_(static_cast<int>(a.rows())) {
  if (a.rows() != a.cols()) throw std::invalid_argument("solve_direct: matrix must be square");
  impl_->a = a;
  impl_->a.makeCompressed();
  umfpack_di_defaults(impl_->control);
  void* symbolic = nullptr;
  double info[UMFPACK_INFO];
  const SparseMatrix& m = impl_->a;
  int status = umfpack_di_symbolic(n_, n_, m.outerIndexPtr(), m.innerIndexPtr(), m.valuePtr(), &symbolic,
                                   impl_->control, info);
  if (status < 0) {
    if (status == UMFPACK_ERROR_out_of_memory) throw std::bad_alloc();
    throw SingularMatrixError("UMFPACK symbolic analysis failed with status " + std::to_string(status), -1);
  }
  status = umfpack_di_numeric(m.outerIndexPtr(), m.innerIndexPtr(), m.valuePtr(), symbolic, &impl_->numeric,
                              impl_->control, info);
  umfpack_di_free_symbolic(&symbolic);
  if (status == UMFPACK_WARNING_singular_matrix) {
    const long pivot = zero_pivot_column(impl_->numeric, n_);
    throw SingularMatrixError("matrix is singular: zero pivot in column " + std::to_string(pivot), pivot);
  }
  if (status < 0) {
    if (status == UMFPACK_ERROR_out_of_memory) throw std::bad_alloc();
    throw std::runtime_error("UMFPACK factorization failed with status " + std::to_string(status));
  }
}

Vector DirectSolver::solve(const Vector& b) const { return impl_->solve(b, UMFPACK_A); }
Vector DirectSolver::solve_transpose(const Vector& b) const { return impl_->solve(b, UMFPACK_At); }
const char* DirectSolver::backend() { return "umfpack"; }

#else

struct DirectSolver::Impl {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

DirectSolver::DirectSolver(const CompressedMatrix& a) : impl_(std::make_unique<Impl>()), n_(static_cast<int>(a.rows())) {
  if (a.rows() != a.cols()) throw std::invalid_argument("solve_direct: matrix must be square");
  SparseMatrix m = a;
  m.makeCompressed();
  impl_->lu.compute(m);
  if (impl_->lu.info() != Eigen::Success) {
    const std::string msg = impl_->lu.lastErrorMessage();
    long pivot = -1;
    const auto pos = msg.find_last_not_of("0123456789");
    if (pos != std::string::npos && pos + 1 < msg.size()) pivot = std::stol(msg.substr(pos + 1));
    throw SingularMatrixError("matrix is singular: " + msg, pivot);
  }
}

Vector DirectSolver::solve(const Vector& b) const { return impl_->lu.solve(b); }
Vector DirectSolver::solve_transpose(const Vector& b) const { return impl_->lu.transpose().solve(b); }
const char* DirectSolver::backend() { return "eigen-sparselu"; }

#endif

DirectSolver::DirectSolver() = default;
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

BorderedSolver::BorderedSolver(const CompressedMatrix& a) : n_(static_cast<int>(a.rows())) {
  if (a.rows() != a.cols()) throw std::invalid_argument("BorderedSolver: matrix must be square");
  const int last = n_ - 1;
  col_ = Vector::Zero(n_);
  row_ = Vector::Zero(n_);
  double corner = 0.0;
  std::vector<Triplet> t;
  t.reserve(a.nonZeros());
  for (int j = 0; j < a.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
      if (it.row() == last && it.col() == last) {
        corner = it.value();
      } else if (it.col() == last) {
        col_[it.row()] = it.value();
      } else if (it.row() == last) {
        row_[it.col()] = it.value();
      } else {
        t.emplace_back(it.row(), it.col(), it.value());
      }
    }
  }
  for (int i = 0; i < last; ++i) {
    const bool in_col = col_[i] != 0.0;
    if (in_col != (row_[i] != 0.0)) {
      support_.clear();
      break;
    }
    if (in_col) support_.push_back(i);
  }
  // A border touching only a few dofs does no harm to the ordering.
  if (n_ < 64 || corner != 0.0 || support_.size() < 16) {
    lu_ = DirectSolver(a);
    return;
  }
  pin_ = support_.front();
  t.emplace_back(last, pin_, 1.0);
  t.emplace_back(pin_, last, 1.0);
  SparseMatrix pinned(n_, n_);
  pinned.setFromTriplets(t.begin(), t.end());
  lu_ = DirectSolver(pinned);
}

Vector BorderedSolver::solve_impl(const Vector& rhs, bool transpose) const {
  const int last = n_ - 1;
  const Vector& b = transpose ? row_ : col_;
  const Vector& c = transpose ? col_ : row_;
  double sum_f = 0.0, sum_b = 0.0;
  for (int i : support_) {
    sum_f += rhs[i];
    sum_b += b[i];
  }
  // The multiplier makes the right-hand side compatible with the cokernel.
  const double multiplier = sum_f / sum_b;
  Vector f = rhs.head(last) - multiplier * b.head(last);
  Vector padded(n_);
  padded.head(last) = f;
  padded[last] = 0.0;
  Vector x = transpose ? lu_.solve_transpose(padded) : lu_.solve(padded);
  // Shift along the kernel to meet the constraint row.
  double c_x = 0.0, c_one = 0.0;
  for (int i : support_) {
    c_x += c[i] * x[i];
    c_one += c[i];
  }
  const double shift = (rhs[last] - c_x) / c_one;
  for (int i : support_) x[i] += shift;
  x[last] = multiplier;
  return x;
}

Vector BorderedSolver::solve(const Vector& rhs) const {
  if (rhs.size() != n_) throw std::invalid_argument("BorderedSolver: size mismatch");
  return pinned() ? solve_impl(rhs, false) : lu_.solve(rhs);
}

Vector BorderedSolver::solve_transpose(const Vector& rhs) const {
  if (rhs.size() != n_) throw std::invalid_argument("BorderedSolver: size mismatch");
  return pinned() ? solve_impl(rhs, true) : lu_.solve_transpose(rhs);
}

Vector solve_direct(const CompressedMatrix& a, const Vector& b) {
  if (b.size() != a.rows()) throw std::invalid_argument("solve_direct: size mismatch");
  return DirectSolver(a).solve(b);
}

double relative_residual(const CompressedMatrix& a, const Vector& x, const Vector& b) {
  const double r = (a * x - b).norm();
  const double nb = b.norm();
  return nb > 0.0 ? r / nb : r;
}

SparseMatrix extract_submatrix(const SparseMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> row_map(a.rows(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_map[rows[i]] = static_cast<int>(i);
  std::vector<Triplet> t;
  t.reserve(a.nonZeros());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (SparseMatrix::InnerIterator it(a, cols[j]); it; ++it) {
      const int r = row_map[it.row()];
      if (r >= 0) t.emplace_back(r, static_cast<int>(j), it.value());
    }
  }
  SparseMatrix out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace ddopt
