#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "crtg/mesh.hpp"
#include "crtg/sparse.hpp"

namespace crtg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Lamé parameters and density.
struct ElasticParams {
  double mu = 1.0;
  double lambda = 1.0;
  double rho = 1.0;

  void validate() const;
};

/// Crouzeix-Raviart degrees of freedom: two displacement components per interior
/// edge. Boundary edges carry no unknowns (their edge mean is zero).
class DofMap {
 public:
  DofMap() = default;
  explicit DofMap(const TriangleMesh& mesh);

  std::size_t n_edges() const { return edge_to_interior_.size(); }
  std::size_t dim() const { return 2 * interior_edges_.size(); }
  const std::vector<int>& interior_edges() const { return interior_edges_; }

  bool has_dofs(std::size_t edge) const { return edge_to_interior_[edge] >= 0; }
  /// Global index of (edge, component), or -1 for boundary edges.
  int dof_of(std::size_t edge, int component) const {
    const int k = edge_to_interior_[edge];
    return k < 0 ? -1 : 2 * k + component;
  }

 private:
  std::vector<int> interior_edges_;
  std::vector<int> edge_to_interior_;
};

using LocalMatrix = std::array<std::array<double, 6>, 6>;

/// Gradients of φ_i = 1 - 2 λ_i where λ_i is the barycentric coordinate of
/// vertex i; φ_i is 1 at the midpoint of edge i (opposite vertex i) and 0 at the
/// other two midpoints. Throws on degenerate or clockwise triangles.
std::array<Vec2, 3> local_basis_gradients(const std::array<Point, 3>& tri);

/// Local DOF 2*i + c is component c on local edge i.
/// K = grad_coeff * |κ| ∇φ_i·∇φ_j δ_cd + div_coeff * |κ| ∂_c φ_i ∂_d φ_j.
LocalMatrix local_stiffness(const std::array<Point, 3>& tri, double grad_coeff, double div_coeff);
/// μ ∫∇u:∇v + (μ+λ) ∫div u div v on one triangle.
LocalMatrix local_stiffness(const std::array<Point, 3>& tri, const ElasticParams& params);
/// ρ|κ|/3 on the diagonal; the C-R basis is L2-orthogonal on each triangle.
LocalMatrix local_mass(const std::array<Point, 3>& tri, double rho);

struct AssembledSystem {
  std::shared_ptr<const TriangleMesh> mesh;
  DofMap dofs;
  ElasticParams params;
  SparseSymMatrix stiffness;
  SparseSymMatrix mass;

  std::size_t dim() const { return dofs.dim(); }
};

/// Assembles stiffness and mass on interior-edge DOFs. Throws if the mesh has no
/// interior edge.
AssembledSystem assemble(std::shared_ptr<const TriangleMesh> mesh, const ElasticParams& params);
AssembledSystem assemble(const TriangleMesh& mesh, const ElasticParams& params);

/// Stiffness with arbitrary coefficients on the gradient and divergence terms.
SparseSymMatrix assemble_stiffness(const TriangleMesh& mesh, const DofMap& dofs, double grad_coeff,
                                   double div_coeff);
SparseSymMatrix assemble_mass(const TriangleMesh& mesh, const DofMap& dofs, double rho);

/// Stiffness over every edge (dimension 2 * n_edges, DOF 2e + c) without removing
/// boundary unknowns.
SparseSymMatrix assemble_full_stiffness(const TriangleMesh& mesh, const ElasticParams& params);

using VectorField = std::function<Vec2(const Point&)>;

/// Edge means of f on every edge by 2-point Gauss quadrature; entry 2e + c.
Vector cr_interpolate_all_edges(const VectorField& f, const TriangleMesh& mesh);
/// Edge means of f on interior edges, laid out by `dofs`.
Vector cr_interpolate(const VectorField& f, const TriangleMesh& mesh, const DofMap& dofs);

/// Expands a reduced vector to per-edge storage (2e + c) with zeros on boundary edges.
Vector expand_to_edges(std::span<const double> u, const DofMap& dofs);

/// Gradient of a per-edge field (2e + c layout) on triangle t: rows are components.
std::array<Vec2, 2> element_gradient(const TriangleMesh& mesh, std::size_t t,
                                     std::span<const double> edge_values);
double element_divergence(const TriangleMesh& mesh, std::size_t t,
                          std::span<const double> edge_values);

double energy_norm(std::span<const double> u, const SparseSymMatrix& stiffness);
double l2_norm(std::span<const double> u, const SparseSymMatrix& mass);
double broken_h1_seminorm(std::span<const double> u, const TriangleMesh& mesh, const DofMap& dofs);

}  // namespace crtg
