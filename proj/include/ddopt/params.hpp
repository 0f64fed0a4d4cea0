#pragma once

#include "ddopt/types.hpp"

#include <functional>

namespace ddopt {

/// Temperature-dependent kinematic viscosity with its derivative.
struct ViscosityModel {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double nu_min = 1.0;
  double nu_max = 1.0;
  // Temperature range used when checking the bounds.
  double sample_lo = -1.0;
  double sample_hi = 1.0;

  static ViscosityModel constant(double nu);
  /// nu(T) = scale * exp(-T), bounded for T in [lo, hi].
  static ViscosityModel exponential(double scale, double lo = 0.0, double hi = 1.0);
};

/// Buoyancy force F(y) acting on the momentum equation, y = (T, S).
struct BuoyancyModel {
  std::function<Vec2(const Vec2&)> value;
  std::function<Mat2(const Vec2&)> jacobian;
  bool affine = false;

  /// F(y) = offset + slope * y.
  static BuoyancyModel linear(const Mat2& slope, const Vec2& offset = Vec2::Zero());
  static BuoyancyModel none() { return linear(Mat2::Zero()); }
};

struct ControlBounds {
  Vec2 lower{-1.0, -1.0};
  Vec2 upper{1.0, 1.0};
};

struct ProblemParams {
  Mat2 inverse_permeability = Mat2::Identity();
  ViscosityModel viscosity = ViscosityModel::constant(1.0);
  Mat2 diffusion = Mat2::Identity();
  BuoyancyModel buoyancy = BuoyancyModel::none();
  double tikhonov = 1.0;
  ControlBounds bounds;
  /// Jump penalty parameter; zero disables the penalty.
  double penalty_a0 = 0.0;

  /// Largest absolute row sum of the inverse permeability.
  double sigma() const;
  /// Largest absolute row sum of the diffusion matrix.
  double sigma_bar() const;
  double nu2() const { return viscosity.nu_max; }

  /// Throws std::invalid_argument on inconsistent coefficients.
  void validate() const;
};

}  // namespace ddopt
