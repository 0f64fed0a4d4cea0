#pragma once

#include "ddopt/mesh.hpp"

#include <array>
#include <vector>

namespace ddopt {

/// Crouzeix-Raviart field: one value per edge midpoint and component.
/// Components are interleaved, dof index = edge * components + component.
struct CRField {
  int components = 1;
  Vector dof;

  CRField() = default;
  CRField(int num_edges, int components_)
      : components(components_), dof(Vector::Zero(static_cast<Eigen::Index>(num_edges) * components_)) {}

  int num_edges() const { return static_cast<int>(dof.size() / components); }
  double operator()(int e, int c = 0) const { return dof[e * components + c]; }
  double& operator()(int e, int c = 0) { return dof[e * components + c]; }
  Vec2 vec(int e) const { return {dof[2 * e], dof[2 * e + 1]}; }
};

/// Piecewise constant field, dof index = cell * components + component.
struct P0Field {
  int components = 1;
  Vector dof;

  P0Field() = default;
  P0Field(int num_cells, int components_)
      : components(components_), dof(Vector::Zero(static_cast<Eigen::Index>(num_cells) * components_)) {}

  int num_cells() const { return static_cast<int>(dof.size() / components); }
  double operator()(int k, int c = 0) const { return dof[k * components + c]; }
  double& operator()(int k, int c = 0) { return dof[k * components + c]; }
  Vec2 vec(int k) const { return {dof[2 * k], dof[2 * k + 1]}; }
};

/// Prescribed values on a set of boundary edges.
struct BoundaryTrace {
  int components = 1;
  std::vector<int> edges;
  Vector values;  // edges.size() * components, interleaved

  double value(std::size_t i, int c = 0) const { return values[static_cast<Eigen::Index>(i) * components + c]; }
};

/// Gradients of the three local CR basis functions of cell k. Basis i
/// belongs to local edge i and equals 1 - 2*lambda_i.
std::array<Vec2, 3> cr_gradients(const Mesh& mesh, int k);

inline double cr_basis(const std::array<double, 3>& bary, int i) { return 1.0 - 2.0 * bary[i]; }

/// Barycentric coordinates of x with respect to cell k (no containment check).
std::array<double, 3> barycentric(const Mesh& mesh, int k, const Vec2& x);

/// Value of component c of the field at barycentric point of cell k.
double cell_value(const Mesh& mesh, const CRField& field, int k, const std::array<double, 3>& bary, int c = 0);

CRField interpolate_cr(const Mesh& mesh, const ScalarFunction& f);
CRField interpolate_cr(const Mesh& mesh, const VectorFunction& f);

/// Edge averages on every boundary edge, or on those selected by `keep`.
BoundaryTrace boundary_interpolate(const Mesh& mesh, const ScalarFunction& g,
                                   const std::function<bool(int edge)>& keep = {});
BoundaryTrace boundary_interpolate(const Mesh& mesh, const VectorFunction& g,
                                   const std::function<bool(int edge)>& keep = {});

P0Field p0_project(const Mesh& mesh, const ScalarFunction& f);
P0Field p0_project(const Mesh& mesh, const VectorFunction& f);
/// Exact cell averages of a CR field (the centroid values).
P0Field p0_project(const Mesh& mesh, const CRField& field);

/// Throws std::invalid_argument when x lies outside cell k.
double evaluate_cr(const Mesh& mesh, const CRField& field, int k, const Vec2& x, int c = 0);
Vec2 gradient_cr(const Mesh& mesh, const CRField& field, int k, int c = 0);

/// Cellwise divergence of a 2-component CR field.
Vector cell_divergence(const Mesh& mesh, const CRField& field);

/// Subtract the area-weighted mean of each component.
void zero_mean(const Mesh& mesh, P0Field& field);
double mean_value(const Mesh& mesh, const P0Field& field, int c = 0);

/// sqrt(sum_K ||v||_K^2 + ||grad v||_K^2) over all components.
double broken_h1_norm(const Mesh& mesh, const CRField& field);

}  // namespace ddopt
