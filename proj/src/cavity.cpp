#include "ddopt/cavity.hpp"

#include <cmath>
#include <stdexcept>

namespace ddopt {

CavityCoefficients cavity_coefficients(const CavityConfig& cfg) {
  if (!(cfg.darcy > 0.0)) throw std::invalid_argument("cavity: Darcy number must be positive");
  if (!(cfg.prandtl > 0.0)) throw std::invalid_argument("cavity: Prandtl number must be positive");
  if (!(cfg.lewis > 0.0)) throw std::invalid_argument("cavity: Lewis number must be positive");
  CavityCoefficients c;
  c.grashof_thermal = cfg.rayleigh / (cfg.prandtl * cfg.darcy);
  c.grashof_solutal = cfg.buoyancy_ratio * c.grashof_thermal;
  c.schmidt = cfg.lewis * cfg.prandtl;
  c.diffusion << cfg.conductivity_ratio / cfg.prandtl, cfg.dufour, cfg.soret, 1.0 / c.schmidt;
  return c;
}

ProblemParams derive_cavity_coefficients(const CavityConfig& cfg) {
  const CavityCoefficients c = cavity_coefficients(cfg);
  ProblemParams p;
  p.inverse_permeability = Mat2::Identity() / cfg.darcy;
  p.viscosity = ViscosityModel::constant(1.0);
  p.diffusion = c.diffusion;
  // Gravity points down: F(T, C) = (Gr_T T + Gr_C C) (0, -1).
  Mat2 slope;
  slope << 0.0, 0.0, -c.grashof_thermal, -c.grashof_solutal;
  p.buoyancy = BuoyancyModel::linear(slope);
  p.tikhonov = cfg.lambda;
  p.bounds = {Vec2(cfg.lower, cfg.lower), Vec2(cfg.upper, cfg.upper)};
  if (cfg.penalty >= 0.0) {
    p.penalty_a0 = cfg.penalty;
  } else if (cfg.darcy <= 1e-4) {
    p.penalty_a0 = 10.0 * std::sqrt(1.0 / cfg.darcy);
  }
  p.validate();
  return p;
}

FlowData cavity_flow_data(const Mesh& mesh, const CavityConfig& cfg) {
  FlowData data;
  data.velocity_bc.components = 2;
  data.velocity_bc.values = Vector::Zero(0);
  data.velocity_bc_function = [](const Vec2&) { return Vec2::Zero().eval(); };
  data.transport_bc.components = 2;
  std::vector<double> values;
  for (int e : mesh.boundary_edges()) {
    const double x = mesh.edge_midpoint(e).x();
    double v;
    if (std::abs(x) < 1e-12) {
      v = cfg.hot;
    } else if (std::abs(x - 1.0) < 1e-12) {
      v = cfg.cold;
    } else {
      continue;
    }
    data.transport_bc.edges.push_back(e);
    values.push_back(v);
    values.push_back(v);
  }
  data.transport_bc.values = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  return data;
}

}  // namespace ddopt
