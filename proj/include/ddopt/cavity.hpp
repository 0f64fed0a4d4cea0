#pragma once

#include "ddopt/adjoint_solver.hpp"

namespace ddopt {

/// Dimensionless groups of the double diffusive porous cavity.
struct CavityConfig {
  double darcy = 1e-3;
  double rayleigh = 100.0;
  double prandtl = 0.71;
  double lewis = 10.0;
  double buoyancy_ratio = 1.0;  // Gr_C / Gr_T
  double soret = 0.0;
  double dufour = 0.1;
  double conductivity_ratio = 1.0;
  double lambda = 1.0;
  double lower = -0.005;
  double upper = 0.005;
  // Wall values of (T, C): hot on the left, cold on the right.
  double hot = 1.0;
  double cold = -1.0;
  /// Jump penalty parameter. Negative selects 10 sqrt(1/Da) when the
  /// permeability term dominates (Da <= 1e-4) and no penalty otherwise.
  double penalty = -1.0;
};

struct CavityCoefficients {
  double grashof_thermal = 0;
  double grashof_solutal = 0;
  double schmidt = 0;
  Mat2 diffusion = Mat2::Zero();
};

/// Throws std::invalid_argument for nonpositive Da or Pr.
CavityCoefficients cavity_coefficients(const CavityConfig& cfg);
ProblemParams derive_cavity_coefficients(const CavityConfig& cfg);

/// No-slip walls, Dirichlet (T, C) on the vertical walls and natural
/// conditions on the horizontal ones.
FlowData cavity_flow_data(const Mesh& mesh, const CavityConfig& cfg);

/// Zero desired states.
inline TrackingData cavity_tracking() { return {}; }

}  // namespace ddopt
