#include "crtg/cr_elasticity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crtg {

void ElasticParams::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
}

DofMap::DofMap(const TriangleMesh& mesh) : edge_to_interior_(mesh.num_edges(), -1) {
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge_boundary[e]) continue;
    edge_to_interior_[e] = static_cast<int>(interior_edges_.size());
    interior_edges_.push_back(static_cast<int>(e));
  }
}

std::array<Vec2, 3> local_basis_gradients(const std::array<Point, 3>& tri) {
  const double area = signed_area(tri[0], tri[1], tri[2]);
  if (!(area > 0.0)) throw std::invalid_argument("degenerate or clockwise triangle");
  std::array<Vec2, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Point& a = tri[(i + 1) % 3];
    const Point& b = tri[(i + 2) % 3];
    // ∇λ_i = (a.y - b.y, b.x - a.x) / (2|κ|), and ∇φ_i = -2∇λ_i
    g[i] = {-(a.y - b.y) / area, -(b.x - a.x) / area};
  }
  return g;
}

LocalMatrix local_stiffness(const std::array<Point, 3>& tri, double grad_coeff, double div_coeff) {
  const auto g = local_basis_gradients(tri);
  const double area = signed_area(tri[0], tri[1], tri[2]);
  LocalMatrix k{};
  for (int i = 0; i < 3; ++i) {
    const double gi[2] = {g[i].x, g[i].y};
    for (int j = 0; j < 3; ++j) {
      const double gj[2] = {g[j].x, g[j].y};
      const double gg = g[i].x * g[j].x + g[i].y * g[j].y;
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          k[2 * i + c][2 * j + d] =
              area * ((c == d ? grad_coeff * gg : 0.0) + div_coeff * gi[c] * gj[d]);
    }
  }
  return k;
}

LocalMatrix local_stiffness(const std::array<Point, 3>& tri, const ElasticParams& params) {
  return local_stiffness(tri, params.mu, params.mu + params.lambda);
}

LocalMatrix local_mass(const std::array<Point, 3>& tri, double rho) {
  const double area = signed_area(tri[0], tri[1], tri[2]);
  if (!(area > 0.0)) throw std::invalid_argument("degenerate or clockwise triangle");
  LocalMatrix m{};
  for (int i = 0; i < 6; ++i) m[i][i] = rho * area / 3.0;
  return m;
}

namespace {

template <typename LocalFn, typename DofFn>
SparseSymMatrix assemble_matrix(const TriangleMesh& mesh, std::size_t dim, LocalFn local, DofFn dof) {
  std::vector<Triplet> triplets;
  triplets.reserve(36 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const LocalMatrix k = local(mesh.triangle_points(t));
    std::array<int, 6> idx{};
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 2; ++c) idx[2 * i + c] = dof(static_cast<std::size_t>(mesh.tri_edges[t][i]), c);
    for (int a = 0; a < 6; ++a) {
      if (idx[a] < 0) continue;
      for (int b = 0; b < 6; ++b) {
        if (idx[b] < 0 || k[a][b] == 0.0) continue;
        triplets.push_back({idx[a], idx[b], k[a][b]});
      }
    }
  }
  return SparseSymMatrix::from_triplets(dim, std::move(triplets));
}

}  // namespace

SparseSymMatrix assemble_stiffness(const TriangleMesh& mesh, const DofMap& dofs, double grad_coeff,
                                   double div_coeff) {
  return assemble_matrix(
      mesh, dofs.dim(),
      [&](const std::array<Point, 3>& tri) { return local_stiffness(tri, grad_coeff, div_coeff); },
      [&](std::size_t e, int c) { return dofs.dof_of(e, c); });
}

SparseSymMatrix assemble_mass(const TriangleMesh& mesh, const DofMap& dofs, double rho) {
  return assemble_matrix(
      mesh, dofs.dim(), [&](const std::array<Point, 3>& tri) { return local_mass(tri, rho); },
      [&](std::size_t e, int c) { return dofs.dof_of(e, c); });
}

SparseSymMatrix assemble_full_stiffness(const TriangleMesh& mesh, const ElasticParams& params) {
  params.validate();
  return assemble_matrix(
      mesh, 2 * mesh.num_edges(),
      [&](const std::array<Point, 3>& tri) { return local_stiffness(tri, params); },
      [](std::size_t e, int c) { return static_cast<int>(2 * e) + c; });
}

AssembledSystem assemble(std::shared_ptr<const TriangleMesh> mesh, const ElasticParams& params) {
  if (!mesh) throw std::invalid_argument("null mesh");
  params.validate();
  AssembledSystem sys;
  sys.dofs = DofMap(*mesh);
  if (sys.dofs.dim() == 0) throw std::invalid_argument("mesh has no interior edges; nothing to solve");
  sys.params = params;
  sys.stiffness = assemble_stiffness(*mesh, sys.dofs, params.mu, params.mu + params.lambda);
  sys.mass = assemble_mass(*mesh, sys.dofs, params.rho);
  sys.mesh = std::move(mesh);
  return sys;
}

AssembledSystem assemble(const TriangleMesh& mesh, const ElasticParams& params) {
  return assemble(std::make_shared<const TriangleMesh>(mesh), params);
}

Vector cr_interpolate_all_edges(const VectorField& f, const TriangleMesh& mesh) {
  // Gauss points on [0, 1]
  const double offset = 0.5 / std::sqrt(3.0);
  const double s0 = 0.5 - offset;
  const double s1 = 0.5 + offset;
  Vector out(2 * mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Point& a = mesh.vertices[mesh.edges[e][0]];
    const Point& b = mesh.vertices[mesh.edges[e][1]];
    const Vec2 f0 = f({a.x + s0 * (b.x - a.x), a.y + s0 * (b.y - a.y)});
    const Vec2 f1 = f({a.x + s1 * (b.x - a.x), a.y + s1 * (b.y - a.y)});
    out[2 * e] = 0.5 * (f0.x + f1.x);
    out[2 * e + 1] = 0.5 * (f0.y + f1.y);
  }
  return out;
}

Vector cr_interpolate(const VectorField& f, const TriangleMesh& mesh, const DofMap& dofs) {
  const Vector all = cr_interpolate_all_edges(f, mesh);
  Vector u(dofs.dim());
  for (int e : dofs.interior_edges())
    for (int c = 0; c < 2; ++c) u[static_cast<std::size_t>(dofs.dof_of(static_cast<std::size_t>(e), c))] =
        all[2 * static_cast<std::size_t>(e) + c];
  return u;
}

Vector expand_to_edges(std::span<const double> u, const DofMap& dofs) {
  if (u.size() != dofs.dim()) throw std::invalid_argument("coefficient vector does not match the DOF map");
  Vector all(2 * dofs.n_edges(), 0.0);
  for (int e : dofs.interior_edges())
    for (int c = 0; c < 2; ++c)
      all[2 * static_cast<std::size_t>(e) + c] =
          u[static_cast<std::size_t>(dofs.dof_of(static_cast<std::size_t>(e), c))];
  return all;
}

std::array<Vec2, 2> element_gradient(const TriangleMesh& mesh, std::size_t t,
                                     std::span<const double> edge_values) {
  if (edge_values.size() != 2 * mesh.num_edges())
    throw std::invalid_argument("per-edge field does not match the mesh");
  const auto g = local_basis_gradients(mesh.triangle_points(t));
  std::array<Vec2, 2> grad{};
  for (int i = 0; i < 3; ++i) {
    const auto e = static_cast<std::size_t>(mesh.tri_edges[t][i]);
    for (int c = 0; c < 2; ++c) {
      grad[c].x += edge_values[2 * e + c] * g[i].x;
      grad[c].y += edge_values[2 * e + c] * g[i].y;
    }
  }
  return grad;
}

double element_divergence(const TriangleMesh& mesh, std::size_t t, std::span<const double> edge_values) {
  const auto grad = element_gradient(mesh, t, edge_values);
  return grad[0].x + grad[1].y;
}

double energy_norm(std::span<const double> u, const SparseSymMatrix& stiffness) {
  if (u.size() != stiffness.dim()) throw std::invalid_argument("energy norm: dimension mismatch");
  return std::sqrt(std::max(0.0, stiffness.quadratic_form(u)));
}

double l2_norm(std::span<const double> u, const SparseSymMatrix& mass) {
  if (u.size() != mass.dim()) throw std::invalid_argument("L2 norm: dimension mismatch");
  return std::sqrt(std::max(0.0, mass.quadratic_form(u)));
}

double broken_h1_seminorm(std::span<const double> u, const TriangleMesh& mesh, const DofMap& dofs) {
  if (u.size() != dofs.dim() || dofs.n_edges() != mesh.num_edges())
    throw std::invalid_argument("broken H1 seminorm: dimension mismatch");
  const Vector all = expand_to_edges(u, dofs);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto grad = element_gradient(mesh, t, all);
    const double sq = grad[0].x * grad[0].x + grad[0].y * grad[0].y + grad[1].x * grad[1].x +
                      grad[1].y * grad[1].y;
    sum += triangle_area(mesh, t) * sq;
  }
  return std::sqrt(sum);
}

}  // namespace crtg
