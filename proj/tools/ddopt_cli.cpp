// Batch driver: ddopt {convergence|cavity|solve} [options]

#include "ddopt/app.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <type_traits>

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> regime, tol_mode, out, export_format, solve_case, mode, state_method;
  std::optional<int> levels, n;
  std::optional<double> da, ra, lambda, lower, upper, tol;
};

void add_options(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "Configuration file (key = value with [sections])");
  app.add_option("--regime", o.regime, "Manufactured regime")->check(CLI::IsMember({"flow", "stokes", "darcy"}));
  app.add_option("--levels", o.levels, "Number of mesh levels");
  app.add_option("--n", o.n, "Cells per side");
  app.add_option("--da", o.da, "Darcy number");
  app.add_option("--ra", o.ra, "Rayleigh number");
  app.add_option("--lambda", o.lambda, "Control cost weight");
  app.add_option("--lbound", o.lower, "Lower control bound");
  app.add_option("--ubound", o.upper, "Upper control bound");
  app.add_option("--tol", o.tol, "PDAS tolerance");
  app.add_option("--tol-mode", o.tol_mode, "abs or rel")->check(CLI::IsMember({"abs", "rel"}));
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--export", o.export_format, "Field export format")->check(CLI::IsMember({"csv", "vtk", "none"}));
  app.add_option("--case", o.solve_case, "Problem for `solve`")
      ->check(CLI::IsMember({"manufactured", "cavity", "zero"}));
  app.add_option("--mode", o.mode, "PDAS coupling")->check(CLI::IsMember({"nested", "newton_sweep"}));
  app.add_option("--state-method", o.state_method, "Nonlinear state solver")
      ->check(CLI::IsMember({"newton", "picard"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of doubly diffusive flow with Crouzeix-Raviart elements"};
  app.require_subcommand(1);
  Overrides o;
  CLI::App* convergence = app.add_subcommand("convergence", "Manufactured-solution convergence study");
  CLI::App* cavity = app.add_subcommand("cavity", "Optimal control in the porous cavity");
  CLI::App* solve = app.add_subcommand("solve", "Single forward solve");
  for (CLI::App* sub : {convergence, cavity, solve}) add_options(*sub, o);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ddopt::exit_config;
  }

  using namespace ddopt;
  KeyValueFile file;
  try {
    if (!o.config.empty()) file = KeyValueFile::load(o.config);
  } catch (const ConfigError& e) {
    std::cerr << o.config << ": " << e.what() << std::endl;
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << e.what() << std::endl;
    return exit_io;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  file.set("run.experiment", name);
  auto put = [&](const char* key, const auto& value) {
    if (!value) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, std::string>) {
      file.set(key, *value);
    } else {
      std::ostringstream os;
      os.precision(17);
      os << *value;
      file.set(key, os.str());
    }
  };
  put("run.regime", o.regime);
  put("run.case", o.solve_case);
  put("mesh.levels", o.levels);
  put("mesh.n", o.n);
  put("cavity.da", o.da);
  put("cavity.ra", o.ra);
  put("control.lambda", o.lambda);
  put("control.lower", o.lower);
  put("control.upper", o.upper);
  put("solver.tol", o.tol);
  put("solver.tol_mode", o.tol_mode);
  put("solver.mode", o.mode);
  put("solver.state_method", o.state_method);
  put("output.dir", o.out);
  put("output.export", o.export_format);

  RunConfig cfg;
  try {
    // The cavity experiment terminates on a relative tolerance unless told otherwise.
    if (name == "cavity" && !file.has("solver.tol_mode")) file.set("solver.tol_mode", "rel");
    cfg = RunConfig::from(file);
  } catch (const ConfigError& e) {
    std::cerr << (o.config.empty() ? "" : o.config + ": ") << e.what() << std::endl;
    return exit_config;
  }
  return run_experiment(cfg, std::cout);
}
