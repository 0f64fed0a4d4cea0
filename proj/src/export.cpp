#include "ddopt/export.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace ddopt {

ExportFormat parse_export_format(const std::string& name) {
  if (name == "csv" || name == "csv-points") return ExportFormat::csv_points;
  if (name == "vtk" || name == "vtk-legacy-ascii") return ExportFormat::vtk_legacy;
  throw std::invalid_argument("unknown export format '" + name + "'");
}

Eigen::MatrixXd cr_at_vertices(const Mesh& mesh, const CRField& field) {
  const int nc = field.components;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mesh.num_vertices(), nc);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(mesh.num_vertices());
  if (field.dof.size() == 0) return out;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const auto& verts = mesh.cell(k);
    for (int c = 0; c < nc; ++c) {
      double sum = 0.0;
      for (int i = 0; i < 3; ++i) sum += field(mesh.cell_edge(k, i), c);
      // The basis function of edge i is 1 at the other two vertices and -1 at vertex i.
      for (int j = 0; j < 3; ++j) out(verts[j], c) += sum - 2.0 * field(mesh.cell_edge(k, j), c);
    }
    for (int j = 0; j < 3; ++j) count[verts[j]] += 1.0;
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) out.row(v) /= count[v];
  return out;
}

Eigen::MatrixXd p0_at_vertices(const Mesh& mesh, const P0Field& field) {
  const int nc = field.components;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mesh.num_vertices(), nc);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(mesh.num_vertices());
  if (field.dof.size() == 0) return out;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    for (int v : mesh.cell(k)) {
      for (int c = 0; c < nc; ++c) out(v, c) += field(k, c);
      count[v] += 1.0;
    }
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) out.row(v) /= count[v];
  return out;
}

namespace {

CRField or_zero(const CRField& f, const Mesh& mesh, int components) {
  return f.dof.size() == 0 ? CRField(mesh.num_edges(), components) : f;
}

P0Field or_zero(const P0Field& f, const Mesh& mesh, int components) {
  return f.dof.size() == 0 ? P0Field(mesh.num_cells(), components) : f;
}

void write_csv(const Mesh& mesh, const FieldBundle& f, std::ostream& out) {
  const Eigen::MatrixXd u = cr_at_vertices(mesh, or_zero(f.velocity, mesh, 2));
  const Eigen::MatrixXd p = p0_at_vertices(mesh, or_zero(f.pressure, mesh, 1));
  const Eigen::MatrixXd y = cr_at_vertices(mesh, or_zero(f.transport, mesh, 2));
  const Eigen::MatrixXd U = p0_at_vertices(mesh, or_zero(f.control, mesh, 2));
  out.precision(17);
  out << "x,y,u1,u2,p,T,S,U1,U2\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2& x = mesh.vertex(v);
    out << x.x() << ',' << x.y() << ',' << u(v, 0) << ',' << u(v, 1) << ',' << p(v, 0) << ',' << y(v, 0) << ','
        << y(v, 1) << ',' << U(v, 0) << ',' << U(v, 1) << '\n';
  }
}

void write_vtk(const Mesh& mesh, const FieldBundle& f, std::ostream& out) {
  const Eigen::MatrixXd u = cr_at_vertices(mesh, or_zero(f.velocity, mesh, 2));
  const Eigen::MatrixXd y = cr_at_vertices(mesh, or_zero(f.transport, mesh, 2));
  const P0Field p = or_zero(f.pressure, mesh, 1);
  const P0Field U = or_zero(f.control, mesh, 2);
  const int nv = mesh.num_vertices();
  const int nk = mesh.num_cells();
  out.precision(17);
  out << "# vtk DataFile Version 3.0\nddopt fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (int v = 0; v < nv; ++v) out << mesh.vertex(v).x() << ' ' << mesh.vertex(v).y() << " 0\n";
  out << "CELLS " << nk << ' ' << 4 * nk << '\n';
  for (int k = 0; k < nk; ++k) {
    const auto& c = mesh.cell(k);
    out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  }
  out << "CELL_TYPES " << nk << '\n';
  for (int k = 0; k < nk; ++k) out << "5\n";
  out << "CELL_DATA " << nk << "\nSCALARS p double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < nk; ++k) out << p(k) << '\n';
  out << "VECTORS U double\n";
  for (int k = 0; k < nk; ++k) out << U(k, 0) << ' ' << U(k, 1) << " 0\n";
  out << "POINT_DATA " << nv << "\nVECTORS u double\n";
  for (int v = 0; v < nv; ++v) out << u(v, 0) << ' ' << u(v, 1) << " 0\n";
  out << "SCALARS T double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < nv; ++v) out << y(v, 0) << '\n';
  out << "SCALARS S double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < nv; ++v) out << y(v, 1) << '\n';
}

}  // namespace

void export_fields(const Mesh& mesh, const FieldBundle& fields, const std::string& path, ExportFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing", path);
  if (format == ExportFormat::csv_points) {
    write_csv(mesh, fields, out);
  } else {
    write_vtk(mesh, fields, out);
  }
  out.flush();
  if (!out) throw IoError("write to " + path + " failed", path);
}

Eigen::MatrixXd read_csv_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path, path);
  std::string line;
  if (!std::getline(in, line) || line != "x,y,u1,u2,p,T,S,U1,U2") {
    throw IoError(path + ": unexpected csv header", path);
  }
  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    int cols = 0;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path + ": bad number '" + cell + "' on row " + std::to_string(rows + 2), path);
      }
      ++cols;
    }
    if (cols != 9) throw IoError(path + ": expected 9 columns on row " + std::to_string(rows + 2), path);
    ++rows;
  }
  Eigen::MatrixXd out(rows, 9);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < 9; ++c) out(r, c) = values[static_cast<std::size_t>(r) * 9 + c];
  }
  return out;
}

}  // namespace ddopt
