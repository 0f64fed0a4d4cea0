#include "ddopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <tuple>

namespace ddopt {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  const int nv = num_vertices();
  const int nc = num_cells();
  if (nc == 0) throw std::invalid_argument("mesh has no cells");

  cell_areas_.resize(nc);
  cell_diameters_.resize(nc);
  for (int k = 0; k < nc; ++k) {
    for (int v : cells_[k]) {
      if (v < 0 || v >= nv) throw std::invalid_argument("cell references unknown vertex");
    }
    const Vec2& a = vertices_[cells_[k][0]];
    const Vec2& b = vertices_[cells_[k][1]];
    const Vec2& c = vertices_[cells_[k][2]];
    const double area = signed_area(a, b, c);
    if (!(area > 0.0)) {
      throw std::invalid_argument("cell " + std::to_string(k) + " is not counter-clockwise");
    }
    cell_areas_[k] = area;
    cell_diameters_[k] = std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
  }

  // (low, high, cell, local index); sorting groups the two sides of an edge.
  std::vector<std::tuple<int, int, int, int>> half_edges;
  half_edges.reserve(3 * static_cast<std::size_t>(nc));
  for (int k = 0; k < nc; ++k) {
    for (int i = 0; i < 3; ++i) {
      int p = cells_[k][(i + 1) % 3];
      int q = cells_[k][(i + 2) % 3];
      if (p > q) std::swap(p, q);
      half_edges.emplace_back(p, q, k, i);
    }
  }
  std::sort(half_edges.begin(), half_edges.end());

  cell_edges_.assign(nc, {-1, -1, -1});
  cell_edge_signs_.assign(nc, {0, 0, 0});
  for (std::size_t s = 0; s < half_edges.size();) {
    const auto [p, q, k, i] = half_edges[s];
    const int e = static_cast<int>(edges_.size());
    edges_.push_back({p, q});
    std::array<int, 2> adj{k, -1};
    cell_edges_[k][i] = e;
    cell_edge_signs_[k][i] = 1;
    std::size_t next = s + 1;
    if (next < half_edges.size() && std::get<0>(half_edges[next]) == p &&
        std::get<1>(half_edges[next]) == q) {
      const int k2 = std::get<2>(half_edges[next]);
      const int i2 = std::get<3>(half_edges[next]);
      adj[1] = k2;
      cell_edges_[k2][i2] = e;
      cell_edge_signs_[k2][i2] = -1;
      ++next;
      if (next < half_edges.size() && std::get<0>(half_edges[next]) == p &&
          std::get<1>(half_edges[next]) == q) {
        throw std::invalid_argument("edge shared by more than two cells");
      }
    }
    edge_cells_.push_back(adj);
    s = next;
  }

  const int ne = num_edges();
  edge_normals_.resize(ne);
  edge_lengths_.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const Vec2 t = vertices_[edges_[e][1]] - vertices_[edges_[e][0]];
    edge_lengths_[e] = t.norm();
    Vec2 n(t.y(), -t.x());
    n /= edge_lengths_[e];
    // Orient outward from the plus cell.
    if (n.dot(edge_midpoint(e) - centroid(edge_cells_[e][0])) < 0.0) n = -n;
    edge_normals_[e] = n;
    if (edge_cells_[e][1] < 0) boundary_edges_.push_back(e);
  }
}

int Mesh::neighbor(int k, int e) const {
  const auto& adj = edge_cells_[e];
  return adj[0] == k ? adj[1] : adj[0];
}

Vec2 Mesh::edge_midpoint(int e) const {
  return 0.5 * (vertices_[edges_[e][0]] + vertices_[edges_[e][1]]);
}

Vec2 Mesh::centroid(int k) const {
  return (vertices_[cells_[k][0]] + vertices_[cells_[k][1]] + vertices_[cells_[k][2]]) / 3.0;
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (double a : cell_areas_) sum += a;
  return sum;
}

Mesh build_unit_square_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_unit_square_mesh: n must be >= 1");
  const double h = 1.0 / n;
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) vertices.emplace_back(i * h, j * h);
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> cells;
  cells.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      cells.push_back({v00, v10, v11});
      cells.push_back({v00, v11, v01});
    }
  }
  return Mesh(std::move(vertices), std::move(cells));
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(mesh.num_vertices() + mesh.num_edges()));
  for (int v = 0; v < mesh.num_vertices(); ++v) vertices.push_back(mesh.vertex(v));
  const int base = mesh.num_vertices();
  for (int e = 0; e < mesh.num_edges(); ++e) vertices.push_back(mesh.edge_midpoint(e));

  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * static_cast<std::size_t>(mesh.num_cells()));
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const auto& c = mesh.cell(k);
    // m_i is the midpoint of the edge opposite vertex i.
    const int m0 = base + mesh.cell_edge(k, 0);
    const int m1 = base + mesh.cell_edge(k, 1);
    const int m2 = base + mesh.cell_edge(k, 2);
    cells.push_back({c[0], m2, m1});
    cells.push_back({m2, c[1], m0});
    cells.push_back({m1, m0, c[2]});
    cells.push_back({m0, m1, m2});
  }
  return Mesh(std::move(vertices), std::move(cells));
}

MeshStats mesh_stats(const Mesh& mesh) {
  MeshStats stats;
  stats.cell_count = mesh.num_cells();
  stats.edge_count = mesh.num_edges();
  stats.min_angle = std::numbers::pi;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    stats.h_max = std::max(stats.h_max, mesh.cell_diameter(k));
    const auto& c = mesh.cell(k);
    for (int i = 0; i < 3; ++i) {
      const Vec2 a = mesh.vertex(c[(i + 1) % 3]) - mesh.vertex(c[i]);
      const Vec2 b = mesh.vertex(c[(i + 2) % 3]) - mesh.vertex(c[i]);
      const double cosine = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
      stats.min_angle = std::min(stats.min_angle, std::acos(cosine));
    }
  }
  return stats;
}

double max_shape_ratio(const Mesh& mesh) {
  double ratio = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    double perimeter = 0.0;
    for (int i = 0; i < 3; ++i) perimeter += mesh.edge_length(mesh.cell_edge(k, i));
    const double inradius = 2.0 * mesh.cell_area(k) / perimeter;
    ratio = std::max(ratio, mesh.cell_diameter(k) / (2.0 * inradius));
  }
  return ratio;
}

void write_mesh_dump(const Mesh& mesh, std::ostream& out) {
  out.precision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    out << "v " << mesh.vertex(v).x() << ' ' << mesh.vertex(v).y() << '\n';
  }
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const auto& c = mesh.cell(k);
    out << "c " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  }
}

}  // namespace ddopt
