#pragma once

#include "ddopt/types.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace ddopt {

/// Conforming triangulation of a polygonal domain with full edge/cell
/// adjacency. Immutable after construction.
///
/// Local numbering: local edge i of a cell is the edge opposite local
/// vertex i. Edges are stored with the lower vertex index first and are
/// numbered in lexicographic order of that pair. For every edge the "plus"
/// cell is the adjacent cell with the lower index; the stored unit normal
/// points from the plus cell towards the minus cell (outward on the
/// boundary).
class Mesh {
 public:
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& cell(int k) const { return cells_[k]; }
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }

  /// Edge opposite local vertex i of cell k.
  int cell_edge(int k, int i) const { return cell_edges_[k][i]; }
  /// +1 if cell k is the plus cell of its local edge i, -1 otherwise.
  int cell_edge_sign(int k, int i) const { return cell_edge_signs_[k][i]; }

  int edge_plus(int e) const { return edge_cells_[e][0]; }
  /// Minus cell, or -1 for a boundary edge.
  int edge_minus(int e) const { return edge_cells_[e][1]; }
  bool is_boundary(int e) const { return edge_cells_[e][1] < 0; }
  /// The cell across edge e seen from cell k (-1 on the boundary).
  int neighbor(int k, int e) const;

  const Vec2& edge_normal(int e) const { return edge_normals_[e]; }
  double edge_length(int e) const { return edge_lengths_[e]; }
  Vec2 edge_midpoint(int e) const;

  double cell_area(int k) const { return cell_areas_[k]; }
  double cell_diameter(int k) const { return cell_diameters_[k]; }
  Vec2 centroid(int k) const;
  /// Outward unit normal of cell k on its local edge i.
  Vec2 outward_normal(int k, int i) const {
    return static_cast<double>(cell_edge_signs_[k][i]) * edge_normals_[cell_edges_[k][i]];
  }

  const std::vector<int>& boundary_edges() const { return boundary_edges_; }
  double total_area() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<std::array<int, 3>> cell_edge_signs_;
  std::vector<std::array<int, 2>> edge_cells_;
  std::vector<Vec2> edge_normals_;
  std::vector<double> edge_lengths_;
  std::vector<double> cell_areas_;
  std::vector<double> cell_diameters_;
  std::vector<int> boundary_edges_;
};

struct MeshStats {
  double h_max = 0.0;
  double min_angle = 0.0;  // radians
  int cell_count = 0;
  int edge_count = 0;
};

/// Structured mesh of the unit square: n x n squares, each split along the
/// lower-left to upper-right diagonal.
Mesh build_unit_square_mesh(int n);

/// Red refinement: every triangle is split into four congruent children.
Mesh refine_uniform(const Mesh& mesh);

MeshStats mesh_stats(const Mesh& mesh);

/// Ratio h_K / rho_K (diameter over inscribed-circle diameter), maximized
/// over all cells.
double max_shape_ratio(const Mesh& mesh);

/// Debug listing: "v x y" and "c i j k" lines.
void write_mesh_dump(const Mesh& mesh, std::ostream& out);

}  // namespace ddopt
