#include "ddopt/verification.hpp"

#include "ddopt/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace ddopt {

namespace {

constexpr double pi = std::numbers::pi;

// Closed forms with first and second derivatives at one point.
struct Sample {
  Vec2 u;
  Mat2 gu;  // gu(a, d) = d u_a / d x_d
  Vec2 lap_u;
  double p;
  Vec2 gp;
  Vec2 y;   // (T, S)
  Mat2 gy;
  Vec2 lap_y;
  Vec2 phi;
  Mat2 gphi;
  Vec2 lap_phi;
  double zeta;
  Vec2 gzeta;
  Vec2 eta;
  Mat2 geta;
  Vec2 lap_eta;
};

Sample sample(const Vec2& pt) {
  const double x = pt.x(), y = pt.y();
  Sample s;
  const double sx = std::sin(pi * x), cx = std::cos(pi * x), sy = std::sin(pi * y), cy = std::cos(pi * y);

  s.u = Vec2(sx * cy, -cx * sy);
  s.gu << pi * cx * cy, -pi * sx * sy,
          pi * sx * sy, -pi * cx * cy;
  s.lap_u = -2.0 * pi * pi * s.u;

  const double ey = std::exp(y);
  s.p = cx * ey;
  s.gp = Vec2(-pi * sx * ey, cx * ey);

  const double cxy = std::cos(x * y), sxy = std::sin(x * y), exy = std::exp(x * y);
  const double r2 = x * x + y * y;
  s.y = Vec2(0.5 + 0.5 * cxy, 0.1 + 0.3 * exy);
  s.gy << -0.5 * y * sxy, -0.5 * x * sxy,
           0.3 * y * exy, 0.3 * x * exy;
  s.lap_y = Vec2(-0.5 * r2 * cxy, 0.3 * r2 * exy);

  // phi_1 = A(x) B(y), phi_2 = -A(y) B(x) with A = sin^2(pi t), B = sin(2 pi t)/2.
  auto A = [](double t) { return std::sin(pi * t) * std::sin(pi * t); };
  auto dA = [](double t) { return pi * std::sin(2.0 * pi * t); };
  auto d2A = [](double t) { return 2.0 * pi * pi * std::cos(2.0 * pi * t); };
  auto B = [](double t) { return 0.5 * std::sin(2.0 * pi * t); };
  auto dB = [](double t) { return pi * std::cos(2.0 * pi * t); };
  auto d2B = [](double t) { return -2.0 * pi * pi * std::sin(2.0 * pi * t); };
  s.phi = Vec2(A(x) * B(y), -A(y) * B(x));
  s.gphi << dA(x) * B(y), A(x) * dB(y),
            -A(y) * dB(x), -dA(y) * B(x);
  s.lap_phi = Vec2(d2A(x) * B(y) + A(x) * d2B(y), -(d2A(y) * B(x) + A(y) * d2B(x)));

  const double ex = std::exp(x);
  s.zeta = cy * ex;
  s.gzeta = Vec2(cy * ex, -pi * sy * ex);

  // eta_k = g_k q with q = x(x-1)y(y-1).
  const double q = x * (x - 1.0) * y * (y - 1.0);
  const Vec2 gq((2.0 * x - 1.0) * y * (y - 1.0), x * (x - 1.0) * (2.0 * y - 1.0));
  const double lap_q = 2.0 * y * (y - 1.0) + 2.0 * x * (x - 1.0);
  const double g[2] = {0.5 * cxy, 0.5 * exy};
  const Vec2 gg[2] = {-0.5 * sxy * Vec2(y, x), 0.5 * exy * Vec2(y, x)};
  const double lap_g[2] = {-0.5 * r2 * cxy, 0.5 * r2 * exy};
  for (int k = 0; k < 2; ++k) {
    s.eta[k] = g[k] * q;
    s.geta.row(k) = (q * gg[k] + g[k] * gq).transpose();
    s.lap_eta[k] = q * lap_g[k] + 2.0 * gg[k].dot(gq) + g[k] * lap_q;
  }
  return s;
}

Mat2 buoyancy_slope(const ManufacturedCase& mc) {
  Mat2 g;
  g << 0.0, 0.0,
       1.0, mc.buoyancy_ratio;
  return g;
}

Vec2 exact_control(const ManufacturedCase& mc, const Vec2& phi) {
  Vec2 u;
  for (int j = 0; j < 2; ++j) u[j] = std::max(mc.bounds.lower[j], std::min(mc.bounds.upper[j], -phi[j] / mc.lambda));
  return u;
}

}  // namespace

Regime parse_regime(const std::string& name) {
  if (name == "flow") return Regime::flow;
  if (name == "stokes") return Regime::stokes;
  if (name == "darcy") return Regime::darcy;
  throw std::invalid_argument("unknown regime '" + name + "' (expected flow, stokes or darcy)");
}

std::string regime_name(Regime regime) {
  switch (regime) {
    case Regime::flow: return "flow";
    case Regime::stokes: return "stokes";
    case Regime::darcy: return "darcy";
  }
  return "flow";
}

ManufacturedCase ManufacturedCase::make(Regime regime) {
  ManufacturedCase mc;
  mc.regime = regime;
  switch (regime) {
    case Regime::flow:
      break;
    case Regime::stokes:
      mc.sigma = 1e-6;
      break;
    case Regime::darcy:
      mc.sigma = 1e6;
      mc.nu2 = 1e-6;
      mc.penalty_a0 = 10.0 * std::sqrt(mc.sigma);
      break;
  }
  return mc;
}

ProblemParams ManufacturedCase::params() const {
  ProblemParams p;
  p.inverse_permeability = sigma * Mat2::Identity();
  p.viscosity = ViscosityModel::exponential(nu2, 0.0, 1.0);
  p.diffusion = diffusion * Mat2::Identity();
  p.buoyancy = BuoyancyModel::linear(buoyancy_slope(*this));
  p.tikhonov = lambda;
  p.bounds = bounds;
  p.penalty_a0 = penalty_a0;
  return p;
}

Eigen::VectorXd exact_eval(const ManufacturedCase& mc, const std::string& field, const Vec2& x) {
  const Sample s = sample(x);
  auto one = [](double v) { return Eigen::VectorXd::Constant(1, v); };
  if (field == "u") return s.u;
  if (field == "p") return one(s.p);
  if (field == "T") return one(s.y[0]);
  if (field == "S") return one(s.y[1]);
  if (field == "y") return s.y;
  if (field == "phi") return s.phi;
  if (field == "zeta") return one(s.zeta);
  if (field == "etaT") return one(s.eta[0]);
  if (field == "etaS") return one(s.eta[1]);
  if (field == "eta") return s.eta;
  if (field == "U") return exact_control(mc, s.phi);
  throw std::invalid_argument("exact_eval: unknown field '" + field + "'");
}

Eigen::MatrixXd exact_gradient(const ManufacturedCase& mc, const std::string& field, const Vec2& x) {
  const Sample s = sample(x);
  if (field == "u") return s.gu;
  if (field == "p") return s.gp.transpose();
  if (field == "T") return s.gy.row(0);
  if (field == "S") return s.gy.row(1);
  if (field == "y") return s.gy;
  if (field == "phi") return s.gphi;
  if (field == "zeta") return s.gzeta.transpose();
  if (field == "etaT") return s.geta.row(0);
  if (field == "etaS") return s.geta.row(1);
  if (field == "eta") return s.geta;
  (void)mc;
  throw std::invalid_argument("exact_gradient: unknown or non-smooth field '" + field + "'");
}

Forcing manufactured_forcing(const ManufacturedCase& mc, const Vec2& x) {
  const Sample s = sample(x);
  const double nu = mc.nu2 * std::exp(-s.y[0]);
  const Vec2 gnu = -nu * s.gy.row(0).transpose();
  const Vec2 buoyancy = buoyancy_slope(mc) * s.y;
  Forcing f;
  f.momentum = mc.sigma * s.u + s.gu * s.u - (nu * s.lap_u + s.gu * gnu) + s.gp - buoyancy -
               exact_control(mc, s.phi);
  f.transport = -mc.diffusion * s.lap_y + s.gy * s.u;
  return f;
}

Vec2 desired_velocity(const ManufacturedCase& mc, const Vec2& x) {
  const Sample s = sample(x);
  const double nu = mc.nu2 * std::exp(-s.y[0]);
  const Vec2 gnu = -nu * s.gy.row(0).transpose();
  const Vec2 adjoint = mc.sigma * s.phi + s.gu.transpose() * s.phi - s.gphi * s.u -
                       (nu * s.lap_phi + s.gphi * gnu) + s.gzeta + s.gy.transpose() * s.eta;
  return s.u - adjoint;
}

Vec2 desired_transport(const ManufacturedCase& mc, const Vec2& x) {
  const Sample s = sample(x);
  const double nu = mc.nu2 * std::exp(-s.y[0]);
  const double dnu = -nu;
  const double coupling = dnu * (s.gu.array() * s.gphi.array()).sum();
  const Vec2 adjoint = -mc.diffusion * s.lap_eta - s.geta * s.u - buoyancy_slope(mc).transpose() * s.phi +
                       Vec2(coupling, 0.0);
  return s.y - adjoint;
}

FlowData manufactured_flow_data(const Mesh& mesh, const ManufacturedCase& mc) {
  FlowData data;
  const VectorFunction u = [](const Vec2& x) -> Vec2 { return sample(x).u; };
  data.velocity_bc = boundary_interpolate(mesh, u);
  data.velocity_bc_function = u;
  data.transport_bc = boundary_interpolate(mesh, VectorFunction([](const Vec2& x) -> Vec2 { return sample(x).y; }));
  data.momentum_source = [mc](const Vec2& x) { return manufactured_forcing(mc, x).momentum; };
  data.transport_source = [mc](const Vec2& x) { return manufactured_forcing(mc, x).transport; };
  return data;
}

TrackingData manufactured_tracking(const ManufacturedCase& mc) {
  TrackingData t;
  t.velocity = [mc](const Vec2& x) { return desired_velocity(mc, x); };
  t.transport = [mc](const Vec2& x) { return desired_transport(mc, x); };
  return t;
}

double cr_error(const Mesh& mesh, const CRField& field, const std::function<Eigen::VectorXd(const Vec2&)>& value,
                const std::function<Eigen::MatrixXd(const Vec2&)>& gradient, double mass_weight, double grad_weight,
                bool jumps) {
  const int nc = field.components;
  double sum = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double area = mesh.cell_area(k);
    Eigen::MatrixXd gh(nc, 2);
    for (int c = 0; c < nc; ++c) gh.row(c) = gradient_cr(mesh, field, k, c).transpose();
    for (const auto& q : cell_rule()) {
      const Vec2 x = cell_point(mesh, k, q.bary);
      const Eigen::VectorXd v = value(x);
      for (int c = 0; c < nc; ++c) {
        const double d = v[c] - cell_value(mesh, field, k, q.bary, c);
        sum += mass_weight * q.weight * area * d * d;
      }
      if (grad_weight != 0.0) sum += grad_weight * q.weight * area * (gradient(x) - gh).squaredNorm();
    }
  }
  if (jumps) {
    // The exact function is continuous, so [f - f_h] = -[f_h] inside and
    // f - f_h on the boundary.
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const auto pts = edge_points(mesh, e);
      const int kp = mesh.edge_plus(e), km = mesh.edge_minus(e);
      for (const Vec2& x : pts) {
        for (int c = 0; c < nc; ++c) {
          double jump = cell_value(mesh, field, kp, barycentric(mesh, kp, x), c);
          jump -= km >= 0 ? cell_value(mesh, field, km, barycentric(mesh, km, x), c) : value(x)[c];
          sum += 0.5 * jump * jump;  // (|e|/2 weight) * (1/h_e)
        }
      }
    }
  }
  return std::sqrt(sum);
}

double p0_error(const Mesh& mesh, const P0Field& field, int component, const ScalarFunction& exact,
                double exponent) {
  double sum = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double area = mesh.cell_area(k);
    for (const auto& q : cell_rule()) {
      const double d = std::abs(exact(cell_point(mesh, k, q.bary)) - field(k, component));
      sum += q.weight * area * std::pow(d, exponent);
    }
  }
  return std::pow(sum, 1.0 / exponent);
}

ErrorRecord error_norms(const Mesh& mesh, const OptResult& numeric, const ManufacturedCase& mc,
                        const NormWeights& weights) {
  if (numeric.state.u.num_edges() != mesh.num_edges() || numeric.control.num_cells() != mesh.num_cells()) {
    throw std::invalid_argument("error_norms: fields do not match the mesh");
  }
  auto val = [&mc](const char* name) {
    return [&mc, name](const Vec2& x) { return exact_eval(mc, name, x); };
  };
  auto grad = [&mc](const char* name) {
    return [&mc, name](const Vec2& x) { return exact_gradient(mc, name, x); };
  };
  auto scalar = [&mc](const char* name, int c) {
    return ScalarFunction([&mc, name, c](const Vec2& x) { return exact_eval(mc, name, x)[c]; });
  };
  auto component = [](const CRField& f, int c) {
    CRField out(f.num_edges(), 1);
    for (int e = 0; e < f.num_edges(); ++e) out(e) = f(e, c);
    return out;
  };

  ErrorRecord r;
  r.e_u = cr_error(mesh, numeric.state.u, val("u"), grad("u"), weights.sigma, weights.nu2, weights.penalty);
  r.e_phi = cr_error(mesh, numeric.adjoint.phi, val("phi"), grad("phi"), weights.sigma, weights.nu2, weights.penalty);
  r.e_T = cr_error(mesh, component(numeric.state.y, 0), val("T"), grad("T"), 0.0, weights.sigma_bar);
  r.e_S = cr_error(mesh, component(numeric.state.y, 1), val("S"), grad("S"), 0.0, weights.sigma_bar);
  r.e_etaT = cr_error(mesh, component(numeric.adjoint.eta, 0), val("etaT"), grad("etaT"), 0.0, weights.sigma_bar);
  r.e_etaS = cr_error(mesh, component(numeric.adjoint.eta, 1), val("etaS"), grad("etaS"), 0.0, weights.sigma_bar);
  r.e_T_plain = cr_error(mesh, component(numeric.state.y, 0), val("T"), grad("T"), 0.0, 1.0);
  r.e_S_plain = cr_error(mesh, component(numeric.state.y, 1), val("S"), grad("S"), 0.0, 1.0);
  r.e_p = p0_error(mesh, numeric.state.p, 0, scalar("p", 0));
  r.e_zeta = p0_error(mesh, numeric.adjoint.xi, 0, scalar("zeta", 0));
  r.e_U1 = p0_error(mesh, numeric.control, 0, scalar("U", 0), weights.control_exponent);
  r.e_U2 = p0_error(mesh, numeric.control, 1, scalar("U", 1), weights.control_exponent);
  r.e_U1_l2 = p0_error(mesh, numeric.control, 0, scalar("U", 0));
  r.e_U2_l2 = p0_error(mesh, numeric.control, 1, scalar("U", 1));
  r.max_div_u = cell_divergence(mesh, numeric.state.u).cwiseAbs().maxCoeff();
  r.max_div_phi = cell_divergence(mesh, numeric.adjoint.phi).cwiseAbs().maxCoeff();
  return r;
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw std::invalid_argument("eoc: errors and mesh sizes differ in length");
  if (errors.size() < 2) throw std::invalid_argument("eoc: need at least two levels");
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (!(hs[i + 1] < hs[i])) throw std::invalid_argument("eoc: mesh sizes must be strictly decreasing");
    rates.push_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
  }
  return rates;
}

const std::vector<std::string>& ConvergenceReport::error_names() {
  static const std::vector<std::string> names = {"e_u",  "e_p",    "e_T",    "e_S",  "e_phi",
                                                 "e_zeta", "e_etaT", "e_etaS", "e_U1", "e_U2"};
  return names;
}

std::vector<double> ConvergenceReport::column(const std::string& name) const {
  std::vector<double> out;
  for (const auto& l : levels) {
    const ErrorRecord& e = l.errors;
    if (name == "e_u") out.push_back(e.e_u);
    else if (name == "e_p") out.push_back(e.e_p);
    else if (name == "e_T") out.push_back(e.e_T);
    else if (name == "e_S") out.push_back(e.e_S);
    else if (name == "e_phi") out.push_back(e.e_phi);
    else if (name == "e_zeta") out.push_back(e.e_zeta);
    else if (name == "e_etaT") out.push_back(e.e_etaT);
    else if (name == "e_etaS") out.push_back(e.e_etaS);
    else if (name == "e_U1") out.push_back(e.e_U1);
    else if (name == "e_U2") out.push_back(e.e_U2);
    else throw std::invalid_argument("unknown error column '" + name + "'");
  }
  return out;
}

std::vector<double> ConvergenceReport::rates(const std::string& name) const {
  std::vector<double> hs;
  for (const auto& l : levels) hs.push_back(l.h);
  return eoc(column(name), hs);
}

ConvergenceReport run_convergence_study(Regime regime, int levels, const StudySettings& settings) {
  if (levels < 3) throw std::invalid_argument("run_convergence_study: need at least 3 levels");
  const ManufacturedCase mc = ManufacturedCase::make(regime);
  const ProblemParams params = mc.params();
  NormWeights weights;
  weights.sigma = params.sigma();
  weights.nu2 = params.nu2();
  weights.sigma_bar = params.sigma_bar();
  weights.penalty = mc.penalty_a0 > 0.0;

  ConvergenceReport report;
  report.regime = regime;
  Mesh mesh = build_unit_square_mesh(settings.coarse_n);
  for (int level = 0; level < levels; ++level) {
    if (level > 0) mesh = refine_uniform(mesh);
    const int n = settings.coarse_n << level;
    OptResult result;
    try {
      const FlowData data = manufactured_flow_data(mesh, mc);
      result = pdas_solve(mesh, params, data, manufactured_tracking(mc), settings.pdas);
      LevelResult lr;
      lr.n = n;
      lr.h = mesh_stats(mesh).h_max;
      lr.dofs_u = 2 * mesh.num_edges();
      lr.dofs_p = mesh.num_cells();
      lr.dofs_y = 2 * mesh.num_edges();
      lr.dofs_U = 2 * mesh.num_cells();
      lr.errors = error_norms(mesh, result, mc, weights);
      lr.iterations = result.iterations;
      lr.max_div = std::max(lr.errors.max_div_u, lr.errors.max_div_phi);
      report.levels.push_back(lr);
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError("level " + std::to_string(level) + " (n=" + std::to_string(n) + "): " + e.what(),
                                e.history());
    } catch (const std::exception& e) {
      throw std::runtime_error("level " + std::to_string(level) + " (n=" + std::to_string(n) + "): " + e.what());
    }
    if (settings.on_level) settings.on_level(level, mesh, result);
  }
  return report;
}

}  // namespace ddopt
