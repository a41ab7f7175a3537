#pragma once

#include <span>
#include <vector>

#include "crtg/cr_elasticity.hpp"
#include "crtg/linear_solvers.hpp"
#include "crtg/sparse.hpp"

namespace crtg {

struct EigenPair {
  double omega = 0.0;
  Vector u;               // ||u||_A = 1
  double residual = 0.0;  // ||A u - omega M u||_2
  int iterations = 0;     // Lanczos steps spent until this pair was accepted
};

/// u^T A u / u^T M u. Throws std::domain_error if u^T M u is not positive.
double rayleigh_quotient(std::span<const double> u, const SparseSymMatrix& a, const SparseSymMatrix& m);

/// k algebraically smallest eigenpairs of A u = omega M u for SPD A and M.
///
/// Lanczos on A^{-1} M in the M inner product with full reorthogonalization,
/// explicit restarts and locking of converged pairs; each step solves with A by
/// preconditioned CG. Returned pairs are sorted by omega, mutually M-orthogonal,
/// scaled to unit energy norm with their largest-magnitude entry positive, and
/// satisfy ||A u - omega M u|| <= eig_tol ||A u||, or lie within a small multiple
/// of the rounding level of that residual when eig_tol is below it (very large
/// Lamé lambda). Throws SolverError otherwise.
std::vector<EigenPair> smallest_eigenpairs(const SparseSymMatrix& a, const SparseSymMatrix& m, int k,
                                           const SolverConfig& config);

inline std::vector<EigenPair> smallest_eigenpairs(const AssembledSystem& sys, int k, const SolverConfig& config) {
  return smallest_eigenpairs(sys.stiffness, sys.mass, k, config);
}

}  // namespace crtg
