#include "ddopt/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ddopt {

namespace {

double max_row_sum(const Mat2& m) {
  return std::max(std::abs(m(0, 0)) + std::abs(m(0, 1)), std::abs(m(1, 0)) + std::abs(m(1, 1)));
}

double min_symmetric_eigenvalue(const Mat2& m) {
  const Mat2 s = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<Mat2>(s).eigenvalues().minCoeff();
}

}  // namespace

ViscosityModel ViscosityModel::constant(double nu) {
  ViscosityModel m;
  m.value = [nu](double) { return nu; };
  m.derivative = [](double) { return 0.0; };
  m.nu_min = nu;
  m.nu_max = nu;
  return m;
}

ViscosityModel ViscosityModel::exponential(double scale, double lo, double hi) {
  ViscosityModel m;
  m.value = [scale](double t) { return scale * std::exp(-t); };
  m.derivative = [scale](double t) { return -scale * std::exp(-t); };
  m.nu_min = scale * std::exp(-hi);
  m.nu_max = scale * std::exp(-lo);
  m.sample_lo = lo;
  m.sample_hi = hi;
  return m;
}

BuoyancyModel BuoyancyModel::linear(const Mat2& slope, const Vec2& offset) {
  BuoyancyModel m;
  m.value = [slope, offset](const Vec2& y) -> Vec2 { return offset + slope * y; };
  m.jacobian = [slope](const Vec2&) -> Mat2 { return slope; };
  m.affine = true;
  return m;
}

double ProblemParams::sigma() const { return max_row_sum(inverse_permeability); }

double ProblemParams::sigma_bar() const { return max_row_sum(diffusion); }

void ProblemParams::validate() const {
  if (!viscosity.value || !viscosity.derivative) throw std::invalid_argument("viscosity model is incomplete");
  if (!buoyancy.value || !buoyancy.jacobian) throw std::invalid_argument("buoyancy model is incomplete");
  if (!(viscosity.nu_min > 0.0) || viscosity.nu_min > viscosity.nu_max) {
    throw std::invalid_argument("viscosity bounds must satisfy 0 < nu_min <= nu_max");
  }
  constexpr int samples = 33;
  const double slack = 1e-12 * viscosity.nu_max;
  for (int i = 0; i < samples; ++i) {
    const double t = viscosity.sample_lo + (viscosity.sample_hi - viscosity.sample_lo) * i / (samples - 1);
    const double nu = viscosity.value(t);
    if (!(nu >= viscosity.nu_min - slack && nu <= viscosity.nu_max + slack)) {
      throw std::invalid_argument("viscosity leaves [nu_min, nu_max] at T = " + std::to_string(t));
    }
  }
  if (!(min_symmetric_eigenvalue(diffusion) > 0.0)) {
    throw std::invalid_argument("diffusion matrix is not positive definite");
  }
  if (min_symmetric_eigenvalue(inverse_permeability) < 0.0) {
    throw std::invalid_argument("inverse permeability is not positive semidefinite");
  }
  if (!(tikhonov > 0.0)) throw std::invalid_argument("Tikhonov weight must be positive");
  for (int j = 0; j < 2; ++j) {
    if (!(bounds.lower[j] < bounds.upper[j])) {
      throw std::invalid_argument("control bounds must satisfy lower < upper");
    }
  }
  if (!(penalty_a0 >= 0.0)) throw std::invalid_argument("penalty parameter must be nonnegative");
}

}  // namespace ddopt
