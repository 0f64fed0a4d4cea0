#include "ddopt/app.hpp"
#include "ddopt/export.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ddopt;

namespace {

Eigen::MatrixXd vertex_array(const Mesh& m) {
  Eigen::MatrixXd v(m.num_vertices(), 2);
  for (int i = 0; i < m.num_vertices(); ++i) v.row(i) = m.vertex(i).transpose();
  return v;
}

Eigen::MatrixXi cell_array(const Mesh& m) {
  Eigen::MatrixXi c(m.num_cells(), 3);
  for (int k = 0; k < m.num_cells(); ++k) {
    for (int i = 0; i < 3; ++i) c(k, i) = m.cell(k)[i];
  }
  return c;
}

// (N, 2) array <-> two-component cellwise field.
P0Field to_p0(const Eigen::MatrixXd& a) {
  if (a.cols() != 2) throw std::invalid_argument("expected an array of shape (cells, 2)");
  P0Field f(static_cast<int>(a.rows()), 2);
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    f(k, 0) = a(k, 0);
    f(k, 1) = a(k, 1);
  }
  return f;
}

Eigen::MatrixXd from_p0(const P0Field& f) {
  Eigen::MatrixXd a(f.num_cells(), f.components);
  for (int k = 0; k < f.num_cells(); ++k) {
    for (int c = 0; c < f.components; ++c) a(k, c) = f(k, c);
  }
  return a;
}

Eigen::MatrixXd from_cr(const CRField& f) {
  Eigen::MatrixXd a(f.num_edges(), f.components);
  for (int e = 0; e < f.num_edges(); ++e) {
    for (int c = 0; c < f.components; ++c) a(e, c) = f(e, c);
  }
  return a;
}

py::dict study_dict(const ConvergenceReport& report) {
  py::dict out;
  std::vector<double> h;
  std::vector<int> its;
  for (const auto& l : report.levels) {
    h.push_back(l.h);
    its.push_back(l.iterations);
  }
  py::dict errors, rates;
  for (const std::string& name : ConvergenceReport::error_names()) {
    errors[py::str(name)] = report.column(name);
    rates[py::str(name)] = report.rates(name);
  }
  out["h"] = h;
  out["iterations"] = its;
  out["errors"] = errors;
  out["rates"] = rates;
  return out;
}

}  // namespace

PYBIND11_MODULE(_ddopt, m) {
  m.doc() = "Crouzeix-Raviart optimal control of doubly diffusive flow";

  py::register_exception<NonConvergenceError>(m, "NonConvergenceError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_edges", &Mesh::num_edges)
      .def_property_readonly("num_cells", &Mesh::num_cells)
      .def_property_readonly("vertices", &vertex_array)
      .def_property_readonly("cells", &cell_array)
      .def_property_readonly("h", [](const Mesh& mesh) { return mesh_stats(mesh).h_max; })
      .def("refine", &refine_uniform)
      .def("__repr__", [](const Mesh& mesh) {
        std::ostringstream os;
        os << "<Mesh " << mesh.num_cells() << " cells, " << mesh.num_edges() << " edges>";
        return os.str();
      });

  m.def("unit_square_mesh", &build_unit_square_mesh, py::arg("n"));

  m.def(
      "project_control",
      [](const Eigen::MatrixXd& v, double lam, const Vec2& lower, const Vec2& upper) {
        return from_p0(project_control(to_p0(v), lam, ControlBounds{lower, upper}));
      },
      py::arg("v"), py::arg("lam"), py::arg("lower"), py::arg("upper"),
      "Cellwise max(lower, min(upper, -v / lam)) for an array of shape (cells, 2).");

  m.def("eoc", &eoc, py::arg("errors"), py::arg("h"));

  m.def(
      "convergence_study",
      [](const std::string& regime, int levels, int coarse_n) {
        StudySettings s;
        s.coarse_n = coarse_n;
        py::gil_scoped_release release;
        ConvergenceReport report = run_convergence_study(parse_regime(regime), levels, s);
        py::gil_scoped_acquire acquire;
        return study_dict(report);
      },
      py::arg("regime") = "flow", py::arg("levels") = 3, py::arg("coarse_n") = 8);

  m.def(
      "solve_manufactured",
      [](int n, const std::string& regime) {
        const Mesh mesh = build_unit_square_mesh(n);
        const ManufacturedCase mc = ManufacturedCase::make(parse_regime(regime));
        const P0Field control =
            p0_project(mesh, VectorFunction([&](const Vec2& x) { return Vec2(exact_eval(mc, "U", x)); }));
        const StateSolution st = solve_state(mesh, mc.params(), manufactured_flow_data(mesh, mc), control);
        py::dict out;
        out["u"] = from_cr(st.u);
        out["p"] = from_p0(st.p);
        out["y"] = from_cr(st.y);
        out["iterations"] = st.iterations;
        out["max_div"] = cell_divergence(mesh, st.u).cwiseAbs().maxCoeff();
        return out;
      },
      py::arg("n"), py::arg("regime") = "flow",
      "Forward solve of the manufactured problem with the exact control; fields are edge or cell arrays.");

  m.def(
      "cavity_coefficients",
      [](double darcy, double rayleigh, double prandtl, double lewis, double buoyancy_ratio) {
        CavityConfig cfg;
        cfg.darcy = darcy;
        cfg.rayleigh = rayleigh;
        cfg.prandtl = prandtl;
        cfg.lewis = lewis;
        cfg.buoyancy_ratio = buoyancy_ratio;
        const CavityCoefficients c = cavity_coefficients(cfg);
        py::dict out;
        out["grashof_thermal"] = c.grashof_thermal;
        out["grashof_solutal"] = c.grashof_solutal;
        out["schmidt"] = c.schmidt;
        out["diffusion"] = Eigen::Matrix2d(c.diffusion);
        return out;
      },
      py::arg("darcy") = 1e-3, py::arg("rayleigh") = 100.0, py::arg("prandtl") = 0.71, py::arg("lewis") = 10.0,
      py::arg("buoyancy_ratio") = 1.0);

  m.def(
      "run",
      [](const std::string& config_text) {
        const RunConfig cfg = RunConfig::from(KeyValueFile::parse(config_text));
        std::ostringstream log;
        int code;
        {
          py::gil_scoped_release release;
          code = run_experiment(cfg, log);
        }
        return py::make_tuple(code, log.str());
      },
      py::arg("config"), "Run an experiment from configuration text; returns (exit code, log).");

  m.def("read_csv_points", &read_csv_points, py::arg("path"));
}
