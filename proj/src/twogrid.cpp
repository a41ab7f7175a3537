#include "crtg/twogrid.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crtg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Barycentric coordinates of p in tri.
std::array<double, 3> barycentric(const std::array<Point, 3>& tri, const Point& p) {
  const double area = signed_area(tri[0], tri[1], tri[2]);
  return {signed_area(p, tri[1], tri[2]) / area, signed_area(tri[0], p, tri[2]) / area,
          signed_area(tri[0], tri[1], p) / area};
}

int refinement_depth(const TriangleMesh& coarse, const TriangleMesh& fine) {
  const int depth = fine.level - coarse.level;
  if (depth < 0 || depth > 15)
    throw std::invalid_argument("fine mesh is not a refinement of the coarse mesh (level " + std::to_string(fine.level) +
                                " vs " + std::to_string(coarse.level) + ")");
  if (fine.num_triangles() != (coarse.num_triangles() << (2 * depth)))
    throw std::invalid_argument("fine mesh is not a refinement of the coarse mesh (triangle counts disagree)");
  return depth;
}

}  // namespace

Vector transfer_load(std::span<const double> u_coarse, const TriangleMesh& coarse_mesh, const DofMap& coarse_dofs,
                     const TriangleMesh& fine_mesh, const DofMap& fine_dofs, double rho) {
  if (u_coarse.size() != coarse_dofs.dim() || coarse_dofs.n_edges() != coarse_mesh.num_edges())
    throw std::invalid_argument("coarse vector does not match the coarse DOF map");
  if (fine_dofs.n_edges() != fine_mesh.num_edges())
    throw std::invalid_argument("fine DOF map does not match the fine mesh");
  const int depth = refinement_depth(coarse_mesh, fine_mesh);
  const Vector coarse_edges = expand_to_edges(u_coarse, coarse_dofs);

  Vector load(fine_dofs.dim(), 0.0);
  const double tol = 1e-10;
  for (std::size_t t = 0; t < fine_mesh.num_triangles(); ++t) {
    const std::size_t parent = t >> (2 * depth);
    const auto coarse_tri = coarse_mesh.triangle_points(parent);
    const auto fine_tri = fine_mesh.triangle_points(t);

    const Point centroid{(fine_tri[0].x + fine_tri[1].x + fine_tri[2].x) / 3.0,
                         (fine_tri[0].y + fine_tri[1].y + fine_tri[2].y) / 3.0};
    for (double l : barycentric(coarse_tri, centroid))
      if (l < -tol) throw std::invalid_argument("fine triangle " + std::to_string(t) + " lies outside its coarse ancestor");

    const double weight = rho * signed_area(fine_tri[0], fine_tri[1], fine_tri[2]) / 3.0;
    const auto& coarse_edge_ids = coarse_mesh.tri_edges[parent];
    for (int i = 0; i < 3; ++i) {
      const auto e = static_cast<std::size_t>(fine_mesh.tri_edges[t][i]);
      if (!fine_dofs.has_dofs(e)) continue;
      const Point mid = midpoint(fine_tri[(i + 1) % 3], fine_tri[(i + 2) % 3]);
      const auto lam = barycentric(coarse_tri, mid);
      for (int c = 0; c < 2; ++c) {
        // u_H = sum_j U_j (1 - 2 lambda_j) on the coarse triangle
        double value = 0.0;
        for (int j = 0; j < 3; ++j)
          value += coarse_edges[2 * static_cast<std::size_t>(coarse_edge_ids[j]) + c] * (1.0 - 2.0 * lam[j]);
        load[static_cast<std::size_t>(fine_dofs.dof_of(e, c))] += weight * value;
      }
    }
  }
  return load;
}

Vector transfer_load(std::span<const double> u_coarse, const AssembledSystem& coarse, const AssembledSystem& fine) {
  if (!coarse.mesh || !fine.mesh) throw std::invalid_argument("assembled system without a mesh");
  if (coarse.params.rho != fine.params.rho) throw std::invalid_argument("coarse and fine densities differ");
  return transfer_load(u_coarse, *coarse.mesh, coarse.dofs, *fine.mesh, fine.dofs, fine.params.rho);
}

namespace {

struct CoarseStep {
  EigenPair pair;
  double seconds;
};

CoarseStep coarse_step(const AssembledSystem& coarse, const AssembledSystem& fine, const SolverConfig& config) {
  if (coarse.params.mu != fine.params.mu || coarse.params.lambda != fine.params.lambda)
    throw std::invalid_argument("coarse and fine systems use different Lamé parameters");
  const auto start = Clock::now();
  auto pairs = smallest_eigenpairs(coarse, 1, config);
  return {std::move(pairs.front()), seconds_since(start)};
}

void finish(TwoGridResult& result, Vector u, const AssembledSystem& fine) {
  const auto start = Clock::now();
  const double energy = energy_norm(u, fine.stiffness);
  if (!(energy > 0.0)) throw std::runtime_error("two-grid fine solve returned a zero vector");
  for (double& x : u) x /= energy;
  result.omega_h_super = rayleigh_quotient(u, fine.stiffness, fine.mass);
  result.u_h_super = std::move(u);
  result.timings.rayleigh = seconds_since(start);
}

}  // namespace

TwoGridResult scheme_41(const AssembledSystem& coarse, const AssembledSystem& fine, const SolverConfig& config) {
  const auto start = Clock::now();
  TwoGridResult result;
  result.scheme = TwoGridScheme::inverse_iteration;

  const CoarseStep step1 = coarse_step(coarse, fine, config);
  result.omega_H = step1.pair.omega;
  result.timings.coarse_eigensolve = step1.seconds;

  const auto t2 = Clock::now();
  Vector load = transfer_load(step1.pair.u, coarse, fine);
  for (double& x : load) x *= result.omega_H;
  LinearSolveStats stats;
  Vector u = spd_solve(fine.stiffness, load, config, &stats);
  result.linear_iterations = stats.iterations;
  result.timings.fine_solve = seconds_since(t2);

  finish(result, std::move(u), fine);
  result.timings.total = seconds_since(start);
  return result;
}

TwoGridResult scheme_42(const AssembledSystem& coarse, const AssembledSystem& fine, const SolverConfig& config) {
  const auto start = Clock::now();
  TwoGridResult result;
  result.scheme = TwoGridScheme::shifted_inverse_iteration;

  const CoarseStep step1 = coarse_step(coarse, fine, config);
  result.omega_H = step1.pair.omega;
  result.timings.coarse_eigensolve = step1.seconds;

  const auto t2 = Clock::now();
  const Vector load = transfer_load(step1.pair.u, coarse, fine);
  // the unshifted stiffness is SPD and spectrally close to A - shift M; built
  // only if MINRES is needed
  std::shared_ptr<const Preconditioner> pc;
  auto preconditioner = [&] {
    if (!pc) pc = make_preconditioner(config.preconditioner, fine.stiffness);
    return pc;
  };
  auto shifted_solve = [&](double shift) {
    const SparseSymMatrix shifted = fine.stiffness.add_scaled(fine.mass, -shift);
    LinearSolveStats stats;
    if (config.indefinite == IndefiniteMethod::ldlt) {
      try {
        Vector u = sym_indefinite_direct_solve(shifted, load, config, &stats);
        result.linear_iterations += stats.iterations;
        return u;
      } catch (const SingularShiftError&) {
        throw;
      } catch (const SolverError&) {
        // unstable without pivoting; fall through to MINRES
      }
    }
    Vector u = sym_indefinite_solve(shifted, load, config, preconditioner().get(), &stats);
    result.linear_iterations += stats.iterations;
    return u;
  };
  Vector u;
  try {
    u = shifted_solve(result.omega_H);
  } catch (const SingularShiftError&) {
    result.shift_regularized = true;
    u = shifted_solve(result.omega_H * (1.0 + config.shift_regularization));
  }
  result.timings.fine_solve = seconds_since(t2);

  finish(result, std::move(u), fine);
  result.timings.total = seconds_since(start);
  return result;
}

TwoGridResult run_scheme(TwoGridScheme scheme, const AssembledSystem& coarse, const AssembledSystem& fine,
                         const SolverConfig& config) {
  return scheme == TwoGridScheme::inverse_iteration ? scheme_41(coarse, fine, config)
                                                    : scheme_42(coarse, fine, config);
}

}  // namespace crtg
