#pragma once

#include "ddopt/mesh.hpp"

#include <array>
#include <cmath>

namespace ddopt {

struct CellQuadPoint {
  std::array<double, 3> bary;
  double weight;  // fraction of the cell area; weights sum to 1
};

// Symmetric 6-point rule, exact for polynomials of degree 4.
inline const std::array<CellQuadPoint, 6>& cell_rule() {
  static const std::array<CellQuadPoint, 6> rule = [] {
    constexpr double a1 = 0.44594849091596488632;
    constexpr double w1 = 0.22338158967801146570;
    constexpr double a2 = 0.09157621350977074346;
    constexpr double w2 = 0.10995174365532186764;
    return std::array<CellQuadPoint, 6>{{
        {{1.0 - 2.0 * a1, a1, a1}, w1},
        {{a1, 1.0 - 2.0 * a1, a1}, w1},
        {{a1, a1, 1.0 - 2.0 * a1}, w1},
        {{1.0 - 2.0 * a2, a2, a2}, w2},
        {{a2, 1.0 - 2.0 * a2, a2}, w2},
        {{a2, a2, 1.0 - 2.0 * a2}, w2},
    }};
  }();
  return rule;
}

// Two-point Gauss rule on [0,1]; each point carries half the edge length.
inline const std::array<double, 2>& edge_rule_abscissae() {
  static const std::array<double, 2> s = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  return s;
}

inline Vec2 cell_point(const Mesh& mesh, int k, const std::array<double, 3>& bary) {
  const auto& c = mesh.cell(k);
  return bary[0] * mesh.vertex(c[0]) + bary[1] * mesh.vertex(c[1]) + bary[2] * mesh.vertex(c[2]);
}

/// Gauss points of edge e in physical coordinates.
inline std::array<Vec2, 2> edge_points(const Mesh& mesh, int e) {
  const Vec2& a = mesh.vertex(mesh.edge(e)[0]);
  const Vec2& b = mesh.vertex(mesh.edge(e)[1]);
  const auto& s = edge_rule_abscissae();
  return {(1.0 - s[0]) * a + s[0] * b, (1.0 - s[1]) * a + s[1] * b};
}

}  // namespace ddopt
