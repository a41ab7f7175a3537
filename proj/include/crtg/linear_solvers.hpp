#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>

#include "crtg/sparse.hpp"

namespace crtg {

enum class PreconditionerKind { jacobi, ic0, cholesky };

PreconditionerKind parse_preconditioner(const std::string& name);

/// How shifted (indefinite) systems are solved.
enum class IndefiniteMethod { ldlt, minres };

IndefiniteMethod parse_indefinite_method(const std::string& name);

struct SolverConfig {
  double eig_tol = 1e-10;     // relative eigen-residual ||Au - wMu|| / ||Au||
  double linear_tol = 1e-12;  // relative Krylov residual ||Ax - b|| / ||b||
  int max_iters = 20000;
  double shift_regularization = 1e-8;
  std::uint64_t seed = 20200617;
  PreconditionerKind preconditioner = PreconditionerKind::cholesky;
  IndefiniteMethod indefinite = IndefiniteMethod::ldlt;

  void validate() const;
};

/// Rounding floor of a computed residual: eps ||A||_inf ||x||_2. Below it the
/// residual of a double-precision x cannot be resolved.
double attainable_residual(double norm_inf_a, std::span<const double> x);

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double achieved_residual, int iterations)
      : std::runtime_error(what), achieved_residual_(achieved_residual), iterations_(iterations) {}

  double achieved_residual() const { return achieved_residual_; }
  int iterations() const { return iterations_; }

 private:
  double achieved_residual_;
  int iterations_;
};

/// The shifted operator is (numerically) singular. Retry with the shift scaled by
/// (1 + SolverConfig::shift_regularization).
class SingularShiftError : public SolverError {
 public:
  using SolverError::SolverError;
};

struct LinearSolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Symmetric positive definite approximation of an operator inverse.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

/// z = r / |diag(A)|; zero diagonal entries are treated as 1.
class JacobiPreconditioner final : public Preconditioner {
 public:
  explicit JacobiPreconditioner(const SparseSymMatrix& a);
  void apply(std::span<const double> r, std::span<double> z) const override;

 private:
  Vector inv_diag_;
};

/// Zero fill-in incomplete Cholesky factor L L^T ≈ A. If a pivot breaks down the
/// factorization is repeated on A + alpha diag(A) with increasing alpha.
class IncompleteCholesky final : public Preconditioner {
 public:
  explicit IncompleteCholesky(const SparseSymMatrix& a);
  void apply(std::span<const double> r, std::span<double> z) const override;

  double diagonal_shift() const { return shift_; }

 private:
  bool factor(const SparseSymMatrix& a, double shift);

  std::size_t dim_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<int> cols_;  // strictly lower part, sorted
  std::vector<double> vals_;
  Vector diag_;
  double shift_ = 0.0;
};

/// Sparse Cholesky factor with approximate minimum degree ordering. As a CG
/// preconditioner it makes the iteration converge in one or two steps; CG then
/// only polishes the residual.
class CholeskyPreconditioner final : public Preconditioner {
 public:
  explicit CholeskyPreconditioner(const SparseSymMatrix& a);
  ~CholeskyPreconditioner() override;
  void apply(std::span<const double> r, std::span<double> z) const override;

 private:
  struct Factor;
  std::unique_ptr<Factor> factor_;
};

std::shared_ptr<const Preconditioner> make_preconditioner(PreconditionerKind kind, const SparseSymMatrix& a);

/// Preconditioned conjugate gradients. The preconditioner named by the config is
/// built once and reused across right-hand sides. `a` must outlive the solver.
class SpdSolver {
 public:
  SpdSolver(const SparseSymMatrix& a, const SolverConfig& config);
  SpdSolver(const SparseSymMatrix& a, const SolverConfig& config, std::shared_ptr<const Preconditioner> pc);

  /// Stops once ||Ax - b|| <= max(linear_tol ||b||, attainable_residual(A, x)).
  /// Throws SolverError if that is not reached within max_iters.
  Vector solve(std::span<const double> b, LinearSolveStats* stats = nullptr) const;

  const SparseSymMatrix& matrix() const { return a_; }
  std::shared_ptr<const Preconditioner> preconditioner() const { return pc_; }

 private:
  const SparseSymMatrix& a_;
  SolverConfig config_;
  std::shared_ptr<const Preconditioner> pc_;
  double norm_inf_ = 0.0;
};

Vector spd_solve(const SparseSymMatrix& a, std::span<const double> b, const SolverConfig& config,
                 LinearSolveStats* stats = nullptr);

/// Preconditioned MINRES for symmetric, possibly indefinite systems. The
/// preconditioner must be SPD; Jacobi on |diag| is used when none is given.
/// Uses the same stopping rule as SpdSolver. Throws SingularShiftError when the
/// Lanczos process detects a singular operator and SolverError when the
/// iteration limit is reached.
Vector sym_indefinite_solve(const SparseSymMatrix& a, std::span<const double> b, const SolverConfig& config,
                            const Preconditioner* pc = nullptr, LinearSolveStats* stats = nullptr);

/// Sparse LDL^T factorization without pivoting (AMD ordering) plus iterative
/// refinement to the SpdSolver stopping rule. Throws SingularShiftError on a
/// zero pivot or non-finite solution, and SolverError when refinement stalls,
/// which signals an unstable unpivoted factorization.
Vector sym_indefinite_direct_solve(const SparseSymMatrix& a, std::span<const double> b, const SolverConfig& config,
                                   LinearSolveStats* stats = nullptr);

}  // namespace crtg
