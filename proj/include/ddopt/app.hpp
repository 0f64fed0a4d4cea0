#pragma once

#include "ddopt/config.hpp"

#include <ostream>

namespace ddopt {

enum ExitCode { exit_ok = 0, exit_config = 2, exit_nonconvergence = 3, exit_io = 4 };

/// Runs the configured experiment, writing artifacts under cfg.out_dir and
/// progress to `log`. Solver failures are mapped to exit codes and leave
/// a diagnostic.txt in the output directory.
int run_experiment(const RunConfig& cfg, std::ostream& log);

/// Writes the errors.csv table (first-level rates are empty fields).
void write_error_table(const ConvergenceReport& report, std::ostream& out);

}  // namespace ddopt
