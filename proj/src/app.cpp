#include "ddopt/app.hpp"

#include "ddopt/export.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>

namespace ddopt {

namespace fs = std::filesystem;

void write_error_table(const ConvergenceReport& report, std::ostream& out) {
  const auto& names = ConvergenceReport::error_names();
  out << "level,h,dofs_u,dofs_p,dofs_y,dofs_U";
  for (const auto& name : names) out << ',' << name << ",rate_" << name.substr(2);
  out << ",It\n";
  std::vector<std::vector<double>> rates;
  for (const auto& name : names) rates.push_back(report.rates(name));
  out << std::setprecision(6);
  for (std::size_t l = 0; l < report.levels.size(); ++l) {
    const LevelResult& lr = report.levels[l];
    out << l << ',' << lr.h << ',' << lr.dofs_u << ',' << lr.dofs_p << ',' << lr.dofs_y << ',' << lr.dofs_U;
    for (std::size_t i = 0; i < names.size(); ++i) {
      out << ',' << report.column(names[i])[l] << ',';
      if (l > 0) out << rates[i][l - 1];
    }
    out << ',' << lr.iterations << '\n';
  }
}

namespace {

std::string export_path(const RunConfig& cfg, const std::string& stem) {
  return (fs::path(cfg.out_dir) / (stem + (cfg.export_format == "vtk" ? ".vtk" : ".csv"))).string();
}

void maybe_export(const RunConfig& cfg, const Mesh& mesh, const FieldBundle& fields, const std::string& stem) {
  if (cfg.export_format == "none") return;
  export_fields(mesh, fields, export_path(cfg, stem), parse_export_format(cfg.export_format));
}

FieldBundle bundle_of(const OptResult& r) { return {r.state.u, r.state.p, r.state.y, r.control}; }

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  const std::string path = (fs::path(cfg.out_dir) / name).string();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing", path);
  return out;
}

int run_convergence(const RunConfig& cfg, std::ostream& log) {
  StudySettings settings;
  settings.coarse_n = cfg.coarse_n;
  settings.pdas = cfg.pdas_settings();
  settings.on_level = [&](int level, const Mesh& mesh, const OptResult& r) {
    log << "level " << level << ": " << mesh.num_cells() << " cells, " << r.iterations << " PDAS iterations"
        << std::endl;
    maybe_export(cfg, mesh, bundle_of(r), "level" + std::to_string(level));
  };
  const ConvergenceReport report = run_convergence_study(cfg.regime, cfg.levels, settings);
  std::ofstream out = open_output(cfg, "errors.csv");
  write_error_table(report, out);
  if (!out) throw IoError("write to errors.csv failed", cfg.out_dir);
  return exit_ok;
}

int run_cavity(const RunConfig& cfg, std::ostream& log) {
  const Mesh mesh = build_unit_square_mesh(cfg.n);
  const ProblemParams params = derive_cavity_coefficients(cfg.cavity);
  const CavityCoefficients c = cavity_coefficients(cfg.cavity);
  const FlowData data = cavity_flow_data(mesh, cfg.cavity);
  std::ofstream iter_log = open_output(cfg, "iterations.log");
  iter_log << "# cavity n=" << cfg.n << " Da=" << cfg.cavity.darcy << " Gr_T=" << c.grashof_thermal
           << " Gr_C=" << c.grashof_solutal << " bounds=[" << cfg.cavity.lower << ", " << cfg.cavity.upper
           << "] penalty=" << params.penalty_a0 << "\n";
  PdasSettings settings = cfg.pdas_settings();
  settings.on_iteration = [&](int m, double change, double cost) {
    iter_log << "iteration " << m << ": control change " << change << ", cost " << cost << std::endl;
    log << "PDAS " << m << ": change " << change << ", cost " << cost << std::endl;
  };
  const OptResult result = pdas_solve(mesh, params, data, cavity_tracking(), settings);
  iter_log << "converged in " << result.iterations << " iterations\n";
  log << "converged in " << result.iterations << " iterations" << std::endl;
  maybe_export(cfg, mesh, bundle_of(result), "cavity");
  return exit_ok;
}

int run_solve(const RunConfig& cfg, std::ostream& log) {
  const Mesh mesh = build_unit_square_mesh(cfg.n);
  ProblemParams params;
  FlowData data;
  P0Field control(mesh.num_cells(), 2);
  switch (cfg.solve_case) {
    case RunConfig::SolveCase::manufactured: {
      const ManufacturedCase mc = ManufacturedCase::make(cfg.regime);
      params = mc.params();
      data = manufactured_flow_data(mesh, mc);
      control = p0_project(mesh, VectorFunction([&](const Vec2& x) { return Vec2(exact_eval(mc, "U", x)); }));
      break;
    }
    case RunConfig::SolveCase::cavity:
      params = derive_cavity_coefficients(cfg.cavity);
      data = cavity_flow_data(mesh, cfg.cavity);
      break;
    case RunConfig::SolveCase::zero:
      // Homogeneous Dirichlet data for (T, S) everywhere; natural conditions
      // alone would leave the transport constants undetermined.
      data.transport_bc.components = 2;
      data.transport_bc.edges = mesh.boundary_edges();
      data.transport_bc.values = Vector::Zero(2 * static_cast<Eigen::Index>(mesh.boundary_edges().size()));
      break;
  }
  NonlinearSettings settings = cfg.pdas_settings().state;
  const StateSolution state = solve_state(mesh, params, data, control, settings);
  log << "state solve: " << state.iterations << " iterations" << std::endl;
  maybe_export(cfg, mesh, {state.u, state.p, state.y, control}, "solution");
  return exit_ok;
}

void write_diagnostic(const RunConfig& cfg, const std::string& what, const std::vector<double>& history) {
  std::ofstream out(fs::path(cfg.out_dir) / "diagnostic.txt");
  if (!out) return;
  out << "experiment: " << experiment_name(cfg.experiment) << "\nerror: " << what << "\n";
  if (!history.empty()) {
    out << "history:";
    for (double h : history) out << ' ' << h;
    out << '\n';
  }
  out << "\n# configuration\n" << cfg.to_file().serialize();
}

}  // namespace

int run_experiment(const RunConfig& cfg, std::ostream& log) {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << std::endl;
    return exit_config;
  }
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    log << "cannot create output directory " << cfg.out_dir << ": " << ec.message() << std::endl;
    return exit_io;
  }
  try {
    switch (cfg.experiment) {
      case RunConfig::Experiment::convergence:
        return run_convergence(cfg, log);
      case RunConfig::Experiment::cavity:
        return run_cavity(cfg, log);
      case RunConfig::Experiment::solve:
        return run_solve(cfg, log);
    }
  } catch (const IoError& e) {
    log << "I/O error: " << e.what() << std::endl;
    return exit_io;
  } catch (const NonConvergenceError& e) {
    log << "not converged: " << e.what() << std::endl;
    write_diagnostic(cfg, e.what(), e.history());
    return exit_nonconvergence;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << std::endl;
    return exit_config;
  } catch (const std::exception& e) {
    // Divergence, singular systems and failures wrapped by the study.
    log << "solver failure: " << e.what() << std::endl;
    write_diagnostic(cfg, e.what(), {});
    return exit_nonconvergence;
  }
  return exit_ok;
}

}  // namespace ddopt
