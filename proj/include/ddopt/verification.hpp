#pragma once

#include "ddopt/control_opt.hpp"

#include <string>
#include <vector>

namespace ddopt {

enum class Regime { flow, stokes, darcy };

Regime parse_regime(const std::string& name);
std::string regime_name(Regime regime);

/// Smooth manufactured optimal-control solution on the unit square with
/// nu(T) = nu2 exp(-T), F(y) = (T + ratio S) (0, 1), K^{-1} = sigma I,
/// D = 1000 I, lambda = 1 and control bounds [-0.1, 0.25].
struct ManufacturedCase {
  Regime regime = Regime::flow;
  double sigma = 1.0;
  double nu2 = 1.0;
  double buoyancy_ratio = 1.0;
  double diffusion = 1000.0;
  double lambda = 1.0;
  ControlBounds bounds{Vec2(-0.1, -0.1), Vec2(0.25, 0.25)};
  /// Jump penalty parameter, nonzero in the Darcy regime.
  double penalty_a0 = 0.0;

  static ManufacturedCase make(Regime regime);
  ProblemParams params() const;
};

/// Closed-form fields: "u", "p", "T", "S", "y", "phi", "zeta", "etaT",
/// "etaS", "eta", "U". Throws std::invalid_argument for other names.
Eigen::VectorXd exact_eval(const ManufacturedCase& mc, const std::string& field, const Vec2& x);

/// Spatial derivatives of a vector/scalar exact field: row = component.
Eigen::MatrixXd exact_gradient(const ManufacturedCase& mc, const std::string& field, const Vec2& x);

struct Forcing {
  Vec2 momentum;
  Vec2 transport;
};

/// Strong residuals of the state equations at the exact solution.
Forcing manufactured_forcing(const ManufacturedCase& mc, const Vec2& x);

/// Desired states making the exact adjoint fields solve the adjoint equations.
Vec2 desired_velocity(const ManufacturedCase& mc, const Vec2& x);
Vec2 desired_transport(const ManufacturedCase& mc, const Vec2& x);

FlowData manufactured_flow_data(const Mesh& mesh, const ManufacturedCase& mc);
TrackingData manufactured_tracking(const ManufacturedCase& mc);

struct NormWeights {
  double sigma = 1.0;
  double nu2 = 1.0;
  double sigma_bar = 1.0;
  double control_exponent = 4.0 / 3.0;
  /// Adds sum_e h_e^{-1} ||[v]||_e^2 to the velocity and adjoint velocity norms.
  bool penalty = false;
};

struct ErrorRecord {
  double e_u = 0, e_p = 0, e_T = 0, e_S = 0, e_phi = 0, e_zeta = 0, e_etaT = 0, e_etaS = 0, e_U1 = 0, e_U2 = 0;
  // Diagnostics: unweighted broken H1 seminorms and L2 control errors.
  double e_T_plain = 0, e_S_plain = 0, e_U1_l2 = 0, e_U2_l2 = 0;
  double max_div_u = 0, max_div_phi = 0;
};

ErrorRecord error_norms(const Mesh& mesh, const OptResult& numeric, const ManufacturedCase& mc,
                        const NormWeights& weights);

/// sqrt(sum_K mass_weight ||f - f_h||_K^2 + grad_weight ||grad(f - f_h)||_K^2
///      [+ sum_e h_e^{-1} ||[f - f_h]||_e^2]) for a CR field against a
/// smooth function given with its derivatives.
double cr_error(const Mesh& mesh, const CRField& field, const std::function<Eigen::VectorXd(const Vec2&)>& value,
                const std::function<Eigen::MatrixXd(const Vec2&)>& gradient, double mass_weight, double grad_weight,
                bool jumps = false);

/// L^r error between a cellwise constant component and a function.
double p0_error(const Mesh& mesh, const P0Field& field, int component, const ScalarFunction& exact,
                double exponent = 2.0);

/// Pairwise rates log(e_i/e_{i+1}) / log(h_i/h_{i+1}).
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs);

struct LevelResult {
  int n = 0;
  double h = 0;
  int dofs_u = 0, dofs_p = 0, dofs_y = 0, dofs_U = 0;
  ErrorRecord errors;
  int iterations = 0;
  double max_div = 0;
};

struct ConvergenceReport {
  Regime regime = Regime::flow;
  std::vector<LevelResult> levels;

  /// Error column by name ("e_u", "e_p", ...).
  std::vector<double> column(const std::string& name) const;
  std::vector<double> rates(const std::string& name) const;
  static const std::vector<std::string>& error_names();
};

struct StudySettings {
  int coarse_n = 8;
  PdasSettings pdas;
  /// Called after each level with its mesh and optimization result.
  std::function<void(int, const Mesh&, const OptResult&)> on_level;
};

/// Manufactured study on `levels` uniformly refined meshes starting at
/// coarse_n. Failures are rethrown with the level annotated.
ConvergenceReport run_convergence_study(Regime regime, int levels, const StudySettings& settings = {});

}  // namespace ddopt
