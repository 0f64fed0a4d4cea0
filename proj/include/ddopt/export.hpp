#pragma once

#include "ddopt/fem_spaces.hpp"

#include <stdexcept>
#include <string>

namespace ddopt {

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::string path) : std::runtime_error(what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Fields written by export_fields. Empty fields are exported as zeros.
struct FieldBundle {
  CRField velocity;    // 2 components
  P0Field pressure;    // 1 component
  CRField transport;   // (T, S)
  P0Field control;     // 2 components
};

enum class ExportFormat { csv_points, vtk_legacy };

ExportFormat parse_export_format(const std::string& name);

/// Vertex values of a CR field: each cell's linear polynomial evaluated at
/// the vertex, averaged over the cells sharing it.
Eigen::MatrixXd cr_at_vertices(const Mesh& mesh, const CRField& field);
/// Cell values averaged over the cells sharing each vertex.
Eigen::MatrixXd p0_at_vertices(const Mesh& mesh, const P0Field& field);

/// csv-points: header "x,y,u1,u2,p,T,S,U1,U2" and one row per vertex.
/// vtk-legacy: unstructured grid, cell data p and U, vertex data u, T, S.
/// Throws IoError when the file cannot be written.
void export_fields(const Mesh& mesh, const FieldBundle& fields, const std::string& path, ExportFormat format);

/// Rows of a csv-points file (columns as in the header).
Eigen::MatrixXd read_csv_points(const std::string& path);

}  // namespace ddopt
