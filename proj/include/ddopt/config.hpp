#pragma once

#include "ddopt/cavity.hpp"
#include "ddopt/verification.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ddopt {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  /// 1-based line of the offending input, 0 when not tied to a line.
  int line() const { return line_; }

 private:
  int line_;
};

/// Flat "key = value" text grouped in [sections]. '#' and ';' start
/// comments. Keys are addressed as "section.key".
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::string& path);
  std::string serialize() const;

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return values_; }
  /// Line where a key was read, 0 for keys set programmatically.
  int line_of(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

struct RunConfig {
  enum class Experiment { convergence, cavity, solve };
  enum class SolveCase { manufactured, cavity, zero };

  Experiment experiment = Experiment::convergence;
  SolveCase solve_case = SolveCase::manufactured;
  Regime regime = Regime::flow;
  int levels = 4;
  int coarse_n = 8;
  int n = 64;
  CavityConfig cavity;
  // Control bounds and weight for the manufactured problems come from the
  // regime; these only apply to the cavity.
  double tol = 1e-6;
  bool relative_tol = false;
  int max_iter = 50;
  bool newton_sweep = false;
  bool newton_state = true;
  double state_tol = 1e-10;
  std::string out_dir = "out";
  std::string export_format = "csv";  // csv, vtk or none

  /// Throws ConfigError for unknown keys or malformed values.
  static RunConfig from(const KeyValueFile& file);
  KeyValueFile to_file() const;
  /// Throws ConfigError when a value is out of range.
  void validate() const;
  PdasSettings pdas_settings() const;
};

const char* experiment_name(RunConfig::Experiment e);
RunConfig::Experiment parse_experiment(const std::string& name);

}  // namespace ddopt
