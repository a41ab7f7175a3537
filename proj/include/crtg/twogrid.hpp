#pragma once

#include <span>

#include "crtg/cr_elasticity.hpp"
#include "crtg/eigsolve.hpp"
#include "crtg/linear_solvers.hpp"

namespace crtg {

enum class TwoGridScheme { inverse_iteration = 1, shifted_inverse_iteration = 2 };

struct TwoGridTimings {
  double coarse_eigensolve = 0.0;  // seconds
  double fine_solve = 0.0;
  double rayleigh = 0.0;
  double total = 0.0;
};

struct TwoGridResult {
  double omega_H = 0.0;        // coarse eigenvalue
  double omega_h_super = 0.0;  // Rayleigh quotient of u_h_super on the fine grid
  Vector u_h_super;            // fine-grid vector, ||.||_h = 1
  TwoGridScheme scheme = TwoGridScheme::inverse_iteration;
  int linear_iterations = 0;
  bool shift_regularized = false;
  TwoGridTimings timings;
};

/// Entry for fine test function v: rho ∫ u_H · v over the fine mesh.
///
/// `fine_mesh` must come from `coarse_mesh` through uniform_refine, so fine
/// triangle t lies in coarse triangle t >> 2d with d the level difference. The
/// product of the two linear factors is integrated exactly on each fine triangle
/// with the edge-midpoint rule. Throws std::invalid_argument when the meshes are
/// not related by refinement.
Vector transfer_load(std::span<const double> u_coarse, const TriangleMesh& coarse_mesh, const DofMap& coarse_dofs,
                     const TriangleMesh& fine_mesh, const DofMap& fine_dofs, double rho = 1.0);

Vector transfer_load(std::span<const double> u_coarse, const AssembledSystem& coarse, const AssembledSystem& fine);

/// Coarse eigenpair, one inverse-iteration solve A_h u = omega_H M(u_H) on the
/// fine grid, then the Rayleigh quotient.
TwoGridResult scheme_41(const AssembledSystem& coarse, const AssembledSystem& fine, const SolverConfig& config);

/// Coarse eigenpair, one shifted solve (A_h - omega_H M_h) u = M(u_H) on the fine
/// grid, then the Rayleigh quotient. The shifted system is factored by LDL^T
/// (config.indefinite == ldlt), falling back to MINRES preconditioned by the
/// stiffness when the unpivoted factorization is unstable. A singular shift is retried once
/// with omega_H (1 + shift_regularization).
TwoGridResult scheme_42(const AssembledSystem& coarse, const AssembledSystem& fine, const SolverConfig& config);

TwoGridResult run_scheme(TwoGridScheme scheme, const AssembledSystem& coarse, const AssembledSystem& fine,
                         const SolverConfig& config);

}  // namespace crtg
