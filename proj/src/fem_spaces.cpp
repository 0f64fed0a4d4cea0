#include "ddopt/fem_spaces.hpp"

#include "ddopt/quadrature.hpp"

#include <cmath>

namespace ddopt {

namespace {

std::array<Vec2, 3> barycentric_gradients(const Mesh& mesh, int k) {
  const auto& c = mesh.cell(k);
  const double two_area = 2.0 * mesh.cell_area(k);
  std::array<Vec2, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Vec2& pj = mesh.vertex(c[(i + 1) % 3]);
    const Vec2& pm = mesh.vertex(c[(i + 2) % 3]);
    g[i] = Vec2(pj.y() - pm.y(), pm.x() - pj.x()) / two_area;
  }
  return g;
}

template <class Eval>
BoundaryTrace boundary_average(const Mesh& mesh, int components, const Eval& eval,
                               const std::function<bool(int)>& keep) {
  BoundaryTrace trace;
  trace.components = components;
  for (int e : mesh.boundary_edges()) {
    if (!keep || keep(e)) trace.edges.push_back(e);
  }
  trace.values.resize(static_cast<Eigen::Index>(trace.edges.size()) * components);
  for (std::size_t i = 0; i < trace.edges.size(); ++i) {
    const auto pts = edge_points(mesh, trace.edges[i]);
    for (int c = 0; c < components; ++c) {
      trace.values[static_cast<Eigen::Index>(i) * components + c] =
          0.5 * (eval(pts[0], c) + eval(pts[1], c));
    }
  }
  return trace;
}

}  // namespace

std::array<Vec2, 3> cr_gradients(const Mesh& mesh, int k) {
  auto g = barycentric_gradients(mesh, k);
  for (auto& v : g) v *= -2.0;
  return g;
}

std::array<double, 3> barycentric(const Mesh& mesh, int k, const Vec2& x) {
  const auto g = barycentric_gradients(mesh, k);
  const Vec2 d = x - mesh.centroid(k);
  return {1.0 / 3.0 + g[0].dot(d), 1.0 / 3.0 + g[1].dot(d), 1.0 / 3.0 + g[2].dot(d)};
}

double cell_value(const Mesh& mesh, const CRField& field, int k, const std::array<double, 3>& bary, int c) {
  double v = 0.0;
  for (int i = 0; i < 3; ++i) v += field(mesh.cell_edge(k, i), c) * cr_basis(bary, i);
  return v;
}

CRField interpolate_cr(const Mesh& mesh, const ScalarFunction& f) {
  CRField out(mesh.num_edges(), 1);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto pts = edge_points(mesh, e);
    out(e) = 0.5 * (f(pts[0]) + f(pts[1]));
  }
  return out;
}

CRField interpolate_cr(const Mesh& mesh, const VectorFunction& f) {
  CRField out(mesh.num_edges(), 2);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto pts = edge_points(mesh, e);
    const Vec2 avg = 0.5 * (f(pts[0]) + f(pts[1]));
    out(e, 0) = avg.x();
    out(e, 1) = avg.y();
  }
  return out;
}

BoundaryTrace boundary_interpolate(const Mesh& mesh, const ScalarFunction& g,
                                   const std::function<bool(int)>& keep) {
  return boundary_average(mesh, 1, [&](const Vec2& x, int) { return g(x); }, keep);
}

BoundaryTrace boundary_interpolate(const Mesh& mesh, const VectorFunction& g,
                                   const std::function<bool(int)>& keep) {
  return boundary_average(mesh, 2, [&](const Vec2& x, int c) { return g(x)[c]; }, keep);
}

P0Field p0_project(const Mesh& mesh, const ScalarFunction& f) {
  P0Field out(mesh.num_cells(), 1);
  for (int k = 0; k < mesh.num_cells(); ++k) {
    double sum = 0.0;
    for (const auto& q : cell_rule()) sum += q.weight * f(cell_point(mesh, k, q.bary));
    out(k) = sum;
  }
  return out;
}

P0Field p0_project(const Mesh& mesh, const VectorFunction& f) {
  P0Field out(mesh.num_cells(), 2);
  for (int k = 0; k < mesh.num_cells(); ++k) {
    Vec2 sum = Vec2::Zero();
    for (const auto& q : cell_rule()) sum += q.weight * f(cell_point(mesh, k, q.bary));
    out(k, 0) = sum.x();
    out(k, 1) = sum.y();
  }
  return out;
}

P0Field p0_project(const Mesh& mesh, const CRField& field) {
  P0Field out(mesh.num_cells(), field.components);
  for (int k = 0; k < mesh.num_cells(); ++k) {
    for (int c = 0; c < field.components; ++c) {
      out(k, c) = (field(mesh.cell_edge(k, 0), c) + field(mesh.cell_edge(k, 1), c) +
                   field(mesh.cell_edge(k, 2), c)) / 3.0;
    }
  }
  return out;
}

double evaluate_cr(const Mesh& mesh, const CRField& field, int k, const Vec2& x, int c) {
  if (k < 0 || k >= mesh.num_cells()) throw std::invalid_argument("evaluate_cr: cell index out of range");
  const auto bary = barycentric(mesh, k, x);
  constexpr double slack = 1e-12;
  for (double b : bary) {
    if (b < -slack) throw std::invalid_argument("evaluate_cr: point lies outside the cell");
  }
  return cell_value(mesh, field, k, bary, c);
}

Vec2 gradient_cr(const Mesh& mesh, const CRField& field, int k, int c) {
  const auto g = cr_gradients(mesh, k);
  Vec2 out = Vec2::Zero();
  for (int i = 0; i < 3; ++i) out += field(mesh.cell_edge(k, i), c) * g[i];
  return out;
}

Vector cell_divergence(const Mesh& mesh, const CRField& field) {
  Vector div(mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    div[k] = gradient_cr(mesh, field, k, 0).x() + gradient_cr(mesh, field, k, 1).y();
  }
  return div;
}

double mean_value(const Mesh& mesh, const P0Field& field, int c) {
  double sum = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) sum += mesh.cell_area(k) * field(k, c);
  return sum / mesh.total_area();
}

void zero_mean(const Mesh& mesh, P0Field& field) {
  for (int c = 0; c < field.components; ++c) {
    const double m = mean_value(mesh, field, c);
    for (int k = 0; k < mesh.num_cells(); ++k) field(k, c) -= m;
  }
}

double broken_h1_norm(const Mesh& mesh, const CRField& field) {
  double sum = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double area = mesh.cell_area(k);
    for (int c = 0; c < field.components; ++c) {
      // The CR mass matrix is diagonal with entries |K|/3.
      for (int i = 0; i < 3; ++i) {
        const double v = field(mesh.cell_edge(k, i), c);
        sum += area / 3.0 * v * v;
      }
      sum += area * gradient_cr(mesh, field, k, c).squaredNorm();
    }
  }
  return std::sqrt(sum);
}

}  // namespace ddopt
