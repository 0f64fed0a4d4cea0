#include "ddopt/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace ddopt {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile file;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto comment = raw.find_first_of("#;");
    const std::string s = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) {
        throw ConfigError("line " + std::to_string(line) + ": malformed section header '" + s + "'", line);
      }
      section = trim(s.substr(1, s.size() - 2));
      if (section.find_first_of(" \t.=") != std::string::npos) {
        throw ConfigError("line " + std::to_string(line) + ": invalid section name '" + section + "'", line);
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected key = value, got '" + s + "'", line);
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || key.find_first_of(" \t.") != std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": invalid key '" + key + "'", line);
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (file.values_.count(full)) {
      throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + full + "'", line);
    }
    file.values_[full] = value;
    file.lines_[full] = line;
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string KeyValueFile::serialize() const {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      sections[""].emplace_back(key, value);
    } else {
      sections[key.substr(0, dot)].emplace_back(key.substr(dot + 1), value);
    }
  }
  std::ostringstream out;
  for (const auto& [name, entries] : sections) {
    if (!name.empty()) out << '[' << name << "]\n";
    for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
    out << '\n';
  }
  return out.str();
}

const std::string& KeyValueFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'", 0);
  return it->second;
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  lines_.erase(key);
}

int KeyValueFile::line_of(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

const char* experiment_name(RunConfig::Experiment e) {
  switch (e) {
    case RunConfig::Experiment::convergence:
      return "convergence";
    case RunConfig::Experiment::cavity:
      return "cavity";
    case RunConfig::Experiment::solve:
      return "solve";
  }
  return "?";
}

RunConfig::Experiment parse_experiment(const std::string& name) {
  if (name == "convergence") return RunConfig::Experiment::convergence;
  if (name == "cavity") return RunConfig::Experiment::cavity;
  if (name == "solve") return RunConfig::Experiment::solve;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

namespace {

const char* case_name(RunConfig::SolveCase c) {
  switch (c) {
    case RunConfig::SolveCase::manufactured:
      return "manufactured";
    case RunConfig::SolveCase::cavity:
      return "cavity";
    case RunConfig::SolveCase::zero:
      return "zero";
  }
  return "?";
}

// One table drives reading and writing, so the two cannot drift apart.
struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> read;
  std::function<std::string(const RunConfig&)> write;
};

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("not a finite number");
  return v;
}

int to_int(const std::string& s) {
  std::size_t used = 0;
  const int v = std::stoi(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer");
  return v;
}

Field real(const char* key, double RunConfig::*member) {
  return {key, [member](RunConfig& c, const std::string& s) { c.*member = to_double(s); },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

Field cavity_real(const char* key, double CavityConfig::*member) {
  return {key, [member](RunConfig& c, const std::string& s) { c.cavity.*member = to_double(s); },
          [member](const RunConfig& c) { return format_double(c.cavity.*member); }};
}

Field integer(const char* key, int RunConfig::*member) {
  return {key, [member](RunConfig& c, const std::string& s) { c.*member = to_int(s); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"run.experiment", [](RunConfig& c, const std::string& s) { c.experiment = parse_experiment(s); },
       [](const RunConfig& c) { return std::string(experiment_name(c.experiment)); }},
      {"run.case",
       [](RunConfig& c, const std::string& s) {
         if (s == "manufactured") {
           c.solve_case = RunConfig::SolveCase::manufactured;
         } else if (s == "cavity") {
           c.solve_case = RunConfig::SolveCase::cavity;
         } else if (s == "zero") {
           c.solve_case = RunConfig::SolveCase::zero;
         } else {
           throw std::invalid_argument("unknown case");
         }
       },
       [](const RunConfig& c) { return std::string(case_name(c.solve_case)); }},
      {"run.regime", [](RunConfig& c, const std::string& s) { c.regime = parse_regime(s); },
       [](const RunConfig& c) { return regime_name(c.regime); }},
      integer("mesh.levels", &RunConfig::levels),
      integer("mesh.coarse_n", &RunConfig::coarse_n),
      integer("mesh.n", &RunConfig::n),
      cavity_real("cavity.da", &CavityConfig::darcy),
      cavity_real("cavity.ra", &CavityConfig::rayleigh),
      cavity_real("cavity.pr", &CavityConfig::prandtl),
      cavity_real("cavity.le", &CavityConfig::lewis),
      cavity_real("cavity.n", &CavityConfig::buoyancy_ratio),
      cavity_real("cavity.sr", &CavityConfig::soret),
      cavity_real("cavity.du", &CavityConfig::dufour),
      cavity_real("cavity.rk", &CavityConfig::conductivity_ratio),
      cavity_real("cavity.hot", &CavityConfig::hot),
      cavity_real("cavity.cold", &CavityConfig::cold),
      cavity_real("cavity.penalty", &CavityConfig::penalty),
      cavity_real("control.lambda", &CavityConfig::lambda),
      cavity_real("control.lower", &CavityConfig::lower),
      cavity_real("control.upper", &CavityConfig::upper),
      real("solver.tol", &RunConfig::tol),
      {"solver.tol_mode",
       [](RunConfig& c, const std::string& s) {
         if (s == "abs" || s == "absolute") {
           c.relative_tol = false;
         } else if (s == "rel" || s == "relative") {
           c.relative_tol = true;
         } else {
           throw std::invalid_argument("expected abs or rel");
         }
       },
       [](const RunConfig& c) { return std::string(c.relative_tol ? "rel" : "abs"); }},
      integer("solver.max_iter", &RunConfig::max_iter),
      {"solver.mode",
       [](RunConfig& c, const std::string& s) {
         if (s == "nested") {
           c.newton_sweep = false;
         } else if (s == "newton_sweep") {
           c.newton_sweep = true;
         } else {
           throw std::invalid_argument("expected nested or newton_sweep");
         }
       },
       [](const RunConfig& c) { return std::string(c.newton_sweep ? "newton_sweep" : "nested"); }},
      {"solver.state_method",
       [](RunConfig& c, const std::string& s) {
         if (s == "newton") {
           c.newton_state = true;
         } else if (s == "picard") {
           c.newton_state = false;
         } else {
           throw std::invalid_argument("expected newton or picard");
         }
       },
       [](const RunConfig& c) { return std::string(c.newton_state ? "newton" : "picard"); }},
      real("solver.state_tol", &RunConfig::state_tol),
      {"output.dir", [](RunConfig& c, const std::string& s) { c.out_dir = s; },
       [](const RunConfig& c) { return c.out_dir; }},
      {"output.export",
       [](RunConfig& c, const std::string& s) {
         if (s != "csv" && s != "vtk" && s != "none") throw std::invalid_argument("expected csv, vtk or none");
         c.export_format = s;
       },
       [](const RunConfig& c) { return c.export_format; }},
  };
  return table;
}

}  // namespace

RunConfig RunConfig::from(const KeyValueFile& file) {
  RunConfig cfg;
  for (const auto& [key, value] : file.entries()) {
    const Field* field = nullptr;
    for (const Field& f : fields()) {
      if (key == f.key) field = &f;
    }
    const int line = file.line_of(key);
    const std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
    if (field == nullptr) throw ConfigError(where + "unknown key '" + key + "'", line);
    try {
      field->read(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(where + "bad value '" + value + "' for " + key + " (" + e.what() + ")", line);
    }
  }
  cfg.validate();
  return cfg;
}

KeyValueFile RunConfig::to_file() const {
  KeyValueFile file;
  for (const Field& f : fields()) file.set(f.key, f.write(*this));
  return file;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg, 0); };
  if (levels < 3) fail("mesh.levels must be at least 3");
  if (coarse_n < 1 || n < 1) fail("mesh sizes must be positive");
  if (!(tol > 0.0) || !(state_tol > 0.0)) fail("tolerances must be positive");
  if (max_iter < 1) fail("solver.max_iter must be positive");
  if (!(cavity.lower < cavity.upper)) fail("control bounds must satisfy lower < upper");
  if (!(cavity.lambda > 0.0)) fail("control.lambda must be positive");
  if (!(cavity.darcy > 0.0) || !(cavity.prandtl > 0.0) || !(cavity.lewis > 0.0)) {
    fail("cavity Da, Pr and Le must be positive");
  }
}

PdasSettings RunConfig::pdas_settings() const {
  PdasSettings s;
  s.tol = tol;
  s.tol_mode = relative_tol ? PdasSettings::Tolerance::relative : PdasSettings::Tolerance::absolute;
  s.max_iter = max_iter;
  s.mode = newton_sweep ? PdasSettings::Mode::newton_sweep : PdasSettings::Mode::nested;
  s.state.tol = state_tol;
  s.state.method = newton_state ? NonlinearSettings::Method::newton : NonlinearSettings::Method::picard;
  return s;
}

}  // namespace ddopt
