#include "ddopt/assembly.hpp"

#include "ddopt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace ddopt {

int assembly_threads() {
  const char* env = std::getenv("DDOPT_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return std::clamp(n, 1, 64);
}

namespace {

// Runs body(item, triplets) over [0, count) in contiguous chunks. Chunks
// are concatenated in order, so the triplet sequence (and therefore the
// summed matrix) does not depend on the thread count.
template <class Body>
SparseMatrix assemble_items(int rows, int cols, int count, const Body& body) {
  const int threads = std::max(1, std::min(assembly_threads(), count / 256));
  std::vector<std::vector<Triplet>> chunks(threads);
  auto run = [&](int t) {
    const int begin = static_cast<int>(static_cast<long>(count) * t / threads);
    const int end = static_cast<int>(static_cast<long>(count) * (t + 1) / threads);
    for (int item = begin; item < end; ++item) body(item, chunks[t]);
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(run, t);
    for (auto& th : pool) th.join();
  }
  std::size_t total = 0;
  for (const auto& c : chunks) total += c.size();
  std::vector<Triplet> all;
  all.reserve(total);
  for (auto& c : chunks) all.insert(all.end(), c.begin(), c.end());
  SparseMatrix m(rows, cols);
  m.setFromTriplets(all.begin(), all.end());
  return m;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// Quadrature data of the facet shared by cell k (local edge i) and its
// neighbour: Gauss points with weights and both cells' barycentrics.
struct FacetQuad {
  std::array<double, 2> weight;
  std::array<std::array<double, 3>, 2> own;
  std::array<std::array<double, 3>, 2> other;
};

FacetQuad facet_quad(const Mesh& mesh, int k, int i, int neighbor) {
  const int e = mesh.cell_edge(k, i);
  const auto pts = edge_points(mesh, e);
  FacetQuad fq;
  for (int q = 0; q < 2; ++q) {
    fq.weight[q] = 0.5 * mesh.edge_length(e);
    fq.own[q] = barycentric(mesh, k, pts[q]);
    if (neighbor >= 0) fq.other[q] = barycentric(mesh, neighbor, pts[q]);
  }
  return fq;
}

// Normal flux of the wind through local edge i of cell k (outward).
double facet_flux(const Mesh& mesh, const CRField& wind, int k, int i) {
  return wind.vec(mesh.cell_edge(k, i)).dot(mesh.outward_normal(k, i));
}

// Raviart-Thomas reconstruction of the wind on cell k evaluated at x.
Vec2 rt_wind(const Mesh& mesh, const CRField& wind, int k, const Vec2& x) {
  Vec2 r = Vec2::Zero();
  const double inv = 1.0 / (2.0 * mesh.cell_area(k));
  for (int l = 0; l < 3; ++l) {
    const double flux = mesh.edge_length(mesh.cell_edge(k, l)) * facet_flux(mesh, wind, k, l);
    r += flux * inv * (x - mesh.vertex(mesh.cell(k)[l]));
  }
  return r;
}

}  // namespace

SparseMatrix assemble_brinkman_diffusion(const Mesh& mesh, const CRField& transport, const ProblemParams& params) {
  const int n = 2 * mesh.num_edges();
  const Mat2& kinv = params.inverse_permeability;
  return assemble_items(n, n, mesh.num_cells(), [&](int k, std::vector<Triplet>& t) {
    const double area = mesh.cell_area(k);
    const auto g = cr_gradients(mesh, k);
    double nu_integral = 0.0;
    for (const auto& q : cell_rule()) {
      nu_integral += q.weight * area * params.viscosity.value(cell_value(mesh, transport, k, q.bary, 0));
    }
    for (int i = 0; i < 3; ++i) {
      const int ei = mesh.cell_edge(k, i);
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          if (kinv(a, b) != 0.0) t.emplace_back(2 * ei + a, 2 * ei + b, kinv(a, b) * area / 3.0);
        }
      }
      for (int j = 0; j < 3; ++j) {
        const int ej = mesh.cell_edge(k, j);
        const double s = nu_integral * g[i].dot(g[j]);
        t.emplace_back(2 * ei, 2 * ej, s);
        t.emplace_back(2 * ei + 1, 2 * ej + 1, s);
      }
    }
  });
}

SparseMatrix assemble_divergence(const Mesh& mesh) {
  return assemble_items(mesh.num_cells(), 2 * mesh.num_edges(), mesh.num_cells(),
                        [&](int k, std::vector<Triplet>& t) {
                          const double area = mesh.cell_area(k);
                          const auto g = cr_gradients(mesh, k);
                          for (int i = 0; i < 3; ++i) {
                            const int ei = mesh.cell_edge(k, i);
                            t.emplace_back(k, 2 * ei, -area * g[i].x());
                            t.emplace_back(k, 2 * ei + 1, -area * g[i].y());
                          }
                        });
}

SparseMatrix assemble_cross_diffusion(const Mesh& mesh, const Mat2& diffusion) {
  const int n = 2 * mesh.num_edges();
  return assemble_items(n, n, mesh.num_cells(), [&](int k, std::vector<Triplet>& t) {
    const double area = mesh.cell_area(k);
    const auto g = cr_gradients(mesh, k);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double s = area * g[i].dot(g[j]);
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            if (diffusion(a, b) != 0.0) {
              t.emplace_back(2 * mesh.cell_edge(k, i) + a, 2 * mesh.cell_edge(k, j) + b, diffusion(a, b) * s);
            }
          }
        }
      }
    }
  });
}

SparseMatrix assemble_upwind_advection(const Mesh& mesh, const CRField& wind, int components) {
  if (wind.components != 2) throw std::invalid_argument("advecting field must have two components");
  const int nc = components;
  const int n = nc * mesh.num_edges();
  return assemble_items(n, n, mesh.num_cells(), [&](int k, std::vector<Triplet>& t) {
    const double area = mesh.cell_area(k);
    const auto g = cr_gradients(mesh, k);
    // Volume term, integrated with the edge-midpoint rule (exact: the
    // integrand is quadratic and psi_i(m_l) = delta_il).
    for (int i = 0; i < 3; ++i) {
      const Vec2 r = rt_wind(mesh, wind, k, mesh.edge_midpoint(mesh.cell_edge(k, i)));
      for (int j = 0; j < 3; ++j) {
        const double s = area / 3.0 * r.dot(g[j]);
        if (s == 0.0) continue;
        for (int c = 0; c < nc; ++c) {
          t.emplace_back(nc * mesh.cell_edge(k, i) + c, nc * mesh.cell_edge(k, j) + c, s);
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.cell_edge(k, i);
      const int nb = mesh.neighbor(k, e);
      if (nb < 0) continue;
      const double beta = facet_flux(mesh, wind, k, i);
      const double up = 0.5 * (beta - std::abs(beta));
      if (up == 0.0) continue;
      const FacetQuad fq = facet_quad(mesh, k, i, nb);
      for (int q = 0; q < 2; ++q) {
        const double w = up * fq.weight[q];
        for (int r = 0; r < 3; ++r) {
          const double test = cr_basis(fq.own[q], r);
          const int row = mesh.cell_edge(k, r);
          for (int c = 0; c < 3; ++c) {
            const double out = w * cr_basis(fq.other[q], c) * test;
            const double in = -w * cr_basis(fq.own[q], c) * test;
            for (int comp = 0; comp < nc; ++comp) {
              t.emplace_back(nc * row + comp, nc * mesh.cell_edge(nb, c) + comp, out);
              t.emplace_back(nc * row + comp, nc * mesh.cell_edge(k, c) + comp, in);
            }
          }
        }
      }
    }
  });
}

SparseMatrix assemble_advection_linearization(const Mesh& mesh, const CRField& wind, const CRField& field) {
  const int nc = field.components;
  const int rows = nc * mesh.num_edges();
  const int cols = 2 * mesh.num_edges();
  return assemble_items(rows, cols, mesh.num_cells(), [&](int k, std::vector<Triplet>& t) {
    const double area = mesh.cell_area(k);
    const auto& cell = mesh.cell(k);
    std::vector<Vec2> grad(nc);
    for (int a = 0; a < nc; ++a) grad[a] = gradient_cr(mesh, field, k, a);
    // Volume: the wind perturbation on edge l of K enters the RT field
    // through its normal flux |e_l| dW_l . n_l.
    for (int i = 0; i < 3; ++i) {
      const Vec2 mi = mesh.edge_midpoint(mesh.cell_edge(k, i));
      for (int l = 0; l < 3; ++l) {
        const int el = mesh.cell_edge(k, l);
        const Vec2 nl = mesh.outward_normal(k, l);
        const Vec2 shape = (mi - mesh.vertex(cell[l])) * (mesh.edge_length(el) / (2.0 * area));
        for (int a = 0; a < nc; ++a) {
          const double s = area / 3.0 * shape.dot(grad[a]);
          if (s == 0.0) continue;
          for (int b = 0; b < 2; ++b) t.emplace_back(nc * mesh.cell_edge(k, i) + a, 2 * el + b, s * nl[b]);
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.cell_edge(k, i);
      const int nb = mesh.neighbor(k, e);
      if (nb < 0) continue;
      const double slope = 0.5 * (1.0 - sign_of(facet_flux(mesh, wind, k, i)));
      if (slope == 0.0) continue;
      const Vec2 n = mesh.outward_normal(k, i);
      const FacetQuad fq = facet_quad(mesh, k, i, nb);
      for (int r = 0; r < 3; ++r) {
        for (int a = 0; a < nc; ++a) {
          double jump_moment = 0.0;
          for (int q = 0; q < 2; ++q) {
            double outer = 0.0, inner = 0.0;
            for (int c = 0; c < 3; ++c) {
              outer += field(mesh.cell_edge(nb, c), a) * cr_basis(fq.other[q], c);
              inner += field(mesh.cell_edge(k, c), a) * cr_basis(fq.own[q], c);
            }
            jump_moment += fq.weight[q] * (outer - inner) * cr_basis(fq.own[q], r);
          }
          const double s = slope * jump_moment;
          if (s == 0.0) continue;
          for (int b = 0; b < 2; ++b) t.emplace_back(nc * mesh.cell_edge(k, r) + a, 2 * e + b, s * n[b]);
        }
      }
    }
  });
}

SparseMatrix assemble_viscosity_coupling(const Mesh& mesh, const CRField& velocity, const CRField& transport,
                                         const ProblemParams& params) {
  const int n = 2 * mesh.num_edges();
  return assemble_items(n, n, mesh.num_cells(), [&](int k, std::vector<Triplet>& t) {
    const double area = mesh.cell_area(k);
    const auto g = cr_gradients(mesh, k);
    std::array<double, 3> coef{0.0, 0.0, 0.0};
    for (const auto& q : cell_rule()) {
      const double d = params.viscosity.derivative(cell_value(mesh, transport, k, q.bary, 0));
      for (int j = 0; j < 3; ++j) coef[j] += q.weight * area * d * cr_basis(q.bary, j);
    }
    const Vec2 gu[2] = {gradient_cr(mesh, velocity, k, 0), gradient_cr(mesh, velocity, k, 1)};
    for (int i = 0; i < 3; ++i) {
      for (int a = 0; a < 2; ++a) {
        const double s = gu[a].dot(g[i]);
        if (s == 0.0) continue;
        for (int j = 0; j < 3; ++j) {
          t.emplace_back(2 * mesh.cell_edge(k, i) + a, 2 * mesh.cell_edge(k, j), s * coef[j]);
        }
      }
    }
  });
}

SparseMatrix assemble_buoyancy_jacobian(const Mesh& mesh, const CRField& transport, const ProblemParams& params) {
  const int n = 2 * mesh.num_edges();
  return assemble_items(n, n, mesh.num_cells(), [&](int k, std::vector<Triplet>& t) {
    const double area = mesh.cell_area(k);
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    for (const auto& q : cell_rule()) {
      const Vec2 y(cell_value(mesh, transport, k, q.bary, 0), cell_value(mesh, transport, k, q.bary, 1));
      const Mat2 fy = params.buoyancy.jacobian(y);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const double w = q.weight * area * cr_basis(q.bary, i) * cr_basis(q.bary, j);
          local.block<2, 2>(2 * i, 2 * j) += w * fy;
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            const double v = local(2 * i + a, 2 * j + b);
            if (v != 0.0) t.emplace_back(2 * mesh.cell_edge(k, i) + a, 2 * mesh.cell_edge(k, j) + b, v);
          }
        }
      }
    }
  });
}

Vector assemble_buoyancy_load(const Mesh& mesh, const CRField& transport, const ProblemParams& params) {
  Vector load = Vector::Zero(2 * mesh.num_edges());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double area = mesh.cell_area(k);
    for (const auto& q : cell_rule()) {
      const Vec2 y(cell_value(mesh, transport, k, q.bary, 0), cell_value(mesh, transport, k, q.bary, 1));
      const Vec2 f = params.buoyancy.value(y);
      for (int i = 0; i < 3; ++i) {
        const double w = q.weight * area * cr_basis(q.bary, i);
        load[2 * mesh.cell_edge(k, i)] += w * f.x();
        load[2 * mesh.cell_edge(k, i) + 1] += w * f.y();
      }
    }
  }
  return load;
}

SparseMatrix assemble_jump_penalty(const Mesh& mesh, double a0, double nu2) {
  const int n = 2 * mesh.num_edges();
  if (a0 == 0.0) return SparseMatrix(n, n);
  return assemble_items(n, n, mesh.num_edges(), [&](int e, std::vector<Triplet>& t) {
    const double kappa = a0 * nu2 / mesh.edge_length(e);
    const auto pts = edge_points(mesh, e);
    const int sides[2] = {mesh.edge_plus(e), mesh.edge_minus(e)};
    for (int q = 0; q < 2; ++q) {
      // Jump basis: +psi on the plus side, -psi on the minus side.
      std::array<int, 6> dof{};
      std::array<double, 6> val{};
      int m = 0;
      for (int s = 0; s < 2; ++s) {
        const int k = sides[s];
        if (k < 0) continue;
        const auto bary = barycentric(mesh, k, pts[q]);
        for (int i = 0; i < 3; ++i) {
          dof[m] = mesh.cell_edge(k, i);
          val[m] = (s == 0 ? 1.0 : -1.0) * cr_basis(bary, i);
          ++m;
        }
      }
      const double w = kappa * 0.5 * mesh.edge_length(e);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          const double v = w * val[r] * val[c];
          t.emplace_back(2 * dof[r], 2 * dof[c], v);
          t.emplace_back(2 * dof[r] + 1, 2 * dof[c] + 1, v);
        }
      }
    }
  });
}

Vector assemble_penalty_boundary_load(const Mesh& mesh, double a0, double nu2, const VectorFunction& g) {
  Vector load = Vector::Zero(2 * mesh.num_edges());
  if (a0 == 0.0 || !g) return load;
  for (int e : mesh.boundary_edges()) {
    const int k = mesh.edge_plus(e);
    const double w = a0 * nu2 / mesh.edge_length(e) * 0.5 * mesh.edge_length(e);
    for (const Vec2& x : edge_points(mesh, e)) {
      const Vec2 gx = g(x);
      const auto bary = barycentric(mesh, k, x);
      for (int i = 0; i < 3; ++i) {
        const int ei = mesh.cell_edge(k, i);
        load[2 * ei] += w * gx.x() * cr_basis(bary, i);
        load[2 * ei + 1] += w * gx.y() * cr_basis(bary, i);
      }
    }
  }
  return load;
}

Vector assemble_load(const Mesh& mesh, const ScalarFunction& f) {
  Vector load = Vector::Zero(mesh.num_edges());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double area = mesh.cell_area(k);
    for (const auto& q : cell_rule()) {
      const double fx = f(cell_point(mesh, k, q.bary));
      for (int i = 0; i < 3; ++i) load[mesh.cell_edge(k, i)] += q.weight * area * fx * cr_basis(q.bary, i);
    }
  }
  return load;
}

Vector assemble_load(const Mesh& mesh, const VectorFunction& f) {
  Vector load = Vector::Zero(2 * mesh.num_edges());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double area = mesh.cell_area(k);
    for (const auto& q : cell_rule()) {
      const Vec2 fx = f(cell_point(mesh, k, q.bary));
      for (int i = 0; i < 3; ++i) {
        const double w = q.weight * area * cr_basis(q.bary, i);
        load[2 * mesh.cell_edge(k, i)] += w * fx.x();
        load[2 * mesh.cell_edge(k, i) + 1] += w * fx.y();
      }
    }
  }
  return load;
}

Vector assemble_control_load(const Mesh& mesh, const P0Field& control) {
  if (control.components != 2 || control.num_cells() != mesh.num_cells()) {
    throw std::invalid_argument("control must be a 2-component cellwise field on the mesh");
  }
  Vector load = Vector::Zero(2 * mesh.num_edges());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const double w = mesh.cell_area(k) / 3.0;
    for (int i = 0; i < 3; ++i) {
      load[2 * mesh.cell_edge(k, i)] += w * control(k, 0);
      load[2 * mesh.cell_edge(k, i) + 1] += w * control(k, 1);
    }
  }
  return load;
}

Vector assemble_mean_constraint(const Mesh& mesh) {
  Vector c(mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) c[k] = mesh.cell_area(k);
  return c;
}

SparseMatrix assemble_cr_mass(const Mesh& mesh, int components) {
  Vector diag = Vector::Zero(static_cast<Eigen::Index>(components) * mesh.num_edges());
  for (int k = 0; k < mesh.num_cells(); ++k) {
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < components; ++c) diag[components * mesh.cell_edge(k, i) + c] += mesh.cell_area(k) / 3.0;
    }
  }
  SparseMatrix m(diag.size(), diag.size());
  m.reserve(Eigen::VectorXi::Ones(diag.size()));
  for (Eigen::Index i = 0; i < diag.size(); ++i) m.insert(i, i) = diag[i];
  m.makeCompressed();
  return m;
}

AdjointBlocks assemble_adjoint_transport_terms(const Mesh& mesh, const ProblemParams& params,
                                               const CRField& velocity, const CRField& transport) {
  if (!velocity.dof.allFinite() || !transport.dof.allFinite()) {
    throw std::invalid_argument("adjoint blocks need a finite state");
  }
  AdjointBlocks b;
  const SparseMatrix conv = assemble_upwind_advection(mesh, velocity, 2);
  b.convection = conv.transpose();
  b.convection_slot = assemble_advection_linearization(mesh, velocity, velocity).transpose();
  b.transport_slot = assemble_advection_linearization(mesh, velocity, transport).transpose();
  b.viscosity = assemble_viscosity_coupling(mesh, velocity, transport, params).transpose();
  b.buoyancy = assemble_buoyancy_jacobian(mesh, transport, params).transpose();
  b.transport = SparseMatrix(assemble_cross_diffusion(mesh, params.diffusion) + conv).transpose();
  return b;
}

}  // namespace ddopt
