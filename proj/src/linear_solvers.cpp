#include "crtg/linear_solvers.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace crtg {

IndefiniteMethod parse_indefinite_method(const std::string& name) {
  if (name == "ldlt") return IndefiniteMethod::ldlt;
  if (name == "minres") return IndefiniteMethod::minres;
  throw std::invalid_argument("unknown indefinite solver '" + name + "' (expected ldlt|minres)");
}

PreconditionerKind parse_preconditioner(const std::string& name) {
  if (name == "jacobi") return PreconditionerKind::jacobi;
  if (name == "ic0") return PreconditionerKind::ic0;
  if (name == "cholesky") return PreconditionerKind::cholesky;
  throw std::invalid_argument("unknown preconditioner '" + name + "' (expected jacobi|ic0|cholesky)");
}

void SolverConfig::validate() const {
  if (!(eig_tol > 0.0 && eig_tol < 1.0)) throw std::invalid_argument("eig_tol must lie in (0, 1)");
  if (!(linear_tol > 0.0 && linear_tol < 1.0)) throw std::invalid_argument("linear_tol must lie in (0, 1)");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(shift_regularization > 0.0 && shift_regularization < 1.0))
    throw std::invalid_argument("shift_regularization must lie in (0, 1)");
}

double attainable_residual(double norm_inf_a, std::span<const double> x) {
  return std::numeric_limits<double>::epsilon() * norm_inf_a * norm2(x);
}

JacobiPreconditioner::JacobiPreconditioner(const SparseSymMatrix& a) : inv_diag_(a.diagonal_values()) {
  for (double& d : inv_diag_) d = d == 0.0 ? 1.0 : 1.0 / std::abs(d);
}

void JacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
}

IncompleteCholesky::IncompleteCholesky(const SparseSymMatrix& a) : dim_(a.dim()) {
  double shift = 0.0;
  while (!factor(a, shift)) {
    shift = shift == 0.0 ? 1e-3 : 2.0 * shift;
    if (shift > 1e3) throw std::runtime_error("incomplete Cholesky failed; matrix is not positive definite");
  }
  shift_ = shift;
}

bool IncompleteCholesky::factor(const SparseSymMatrix& a, double shift) {
  const auto& ro = a.row_offsets();
  const auto& ci = a.col_indices();
  const auto& va = a.values();

  offsets_.assign(dim_ + 1, 0);
  cols_.clear();
  vals_.clear();
  diag_.assign(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t k = ro[i]; k < ro[i + 1]; ++k)
      if (static_cast<std::size_t>(ci[k]) < i) {
        cols_.push_back(ci[k]);
        vals_.push_back(va[k]);
      }
    offsets_[i + 1] = cols_.size();
  }

  // position of column j inside the current row, or -1
  std::vector<std::ptrdiff_t> pos(dim_, -1);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) pos[static_cast<std::size_t>(cols_[k])] = static_cast<std::ptrdiff_t>(k);

    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      const auto j = static_cast<std::size_t>(cols_[k]);
      double s = vals_[k];
      for (std::size_t m = offsets_[j]; m < offsets_[j + 1]; ++m) {
        const std::ptrdiff_t p = pos[static_cast<std::size_t>(cols_[m])];
        if (p >= 0 && static_cast<std::size_t>(p) < k) s -= vals_[static_cast<std::size_t>(p)] * vals_[m];
      }
      vals_[k] = s / diag_[j];
    }

    const double aii = a.at(i, i);
    double d = aii * (1.0 + shift);
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) d -= vals_[k] * vals_[k];
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) pos[static_cast<std::size_t>(cols_[k])] = -1;
    if (!(d > 1e-14 * std::abs(aii))) return false;
    diag_[i] = std::sqrt(d);
  }
  return true;
}

void IncompleteCholesky::apply(std::span<const double> r, std::span<double> z) const {
  // L y = r
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = r[i];
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s -= vals_[k] * z[static_cast<std::size_t>(cols_[k])];
    z[i] = s / diag_[i];
  }
  // L^T z = y, column sweep
  for (std::size_t i = dim_; i-- > 0;) {
    z[i] /= diag_[i];
    const double zi = z[i];
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) z[static_cast<std::size_t>(cols_[k])] -= vals_[k] * zi;
  }
}

struct CholeskyPreconditioner::Factor {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

namespace {

Eigen::SparseMatrix<double> lower_triangle(const SparseSymMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.dim());
  std::vector<Eigen::Triplet<double>> lower;
  lower.reserve(a.nnz() / 2 + a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
      if (static_cast<std::size_t>(a.col_indices()[k]) <= i)
        lower.emplace_back(static_cast<Eigen::Index>(i), a.col_indices()[k], a.values()[k]);
  Eigen::SparseMatrix<double> s(n, n);
  s.setFromTriplets(lower.begin(), lower.end());
  return s;
}

}  // namespace

CholeskyPreconditioner::CholeskyPreconditioner(const SparseSymMatrix& a) : factor_(std::make_unique<Factor>()) {
  const Eigen::SparseMatrix<double> s = lower_triangle(a);
  factor_->llt.compute(s);
  if (factor_->llt.info() != Eigen::Success)
    throw std::runtime_error("sparse Cholesky failed; matrix is not positive definite");
}

CholeskyPreconditioner::~CholeskyPreconditioner() = default;

void CholeskyPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const auto n = static_cast<Eigen::Index>(r.size());
  Eigen::Map<const Eigen::VectorXd> rv(r.data(), n);
  Eigen::Map<Eigen::VectorXd> zv(z.data(), n);
  zv = factor_->llt.solve(rv);
}

std::shared_ptr<const Preconditioner> make_preconditioner(PreconditionerKind kind, const SparseSymMatrix& a) {
  switch (kind) {
    case PreconditionerKind::jacobi:
      return std::make_shared<JacobiPreconditioner>(a);
    case PreconditionerKind::ic0:
      return std::make_shared<IncompleteCholesky>(a);
    case PreconditionerKind::cholesky:
      return std::make_shared<CholeskyPreconditioner>(a);
  }
  throw std::invalid_argument("unknown preconditioner kind");
}

SpdSolver::SpdSolver(const SparseSymMatrix& a, const SolverConfig& config)
    : SpdSolver(a, config, make_preconditioner(config.preconditioner, a)) {}

SpdSolver::SpdSolver(const SparseSymMatrix& a, const SolverConfig& config,
                     std::shared_ptr<const Preconditioner> pc)
    : a_(a), config_(config), pc_(std::move(pc)), norm_inf_(a.norm_inf()) {
  config_.validate();
  if (!pc_) throw std::invalid_argument("null preconditioner");
}

Vector SpdSolver::solve(std::span<const double> b, LinearSolveStats* stats) const {
  const std::size_t n = a_.dim();
  if (b.size() != n) throw std::invalid_argument("right-hand side does not match the matrix");

  Vector x(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }
  const double target = config_.linear_tol * bnorm;

  Vector r(b.begin(), b.end());
  Vector z(n), p(n), q(n);
  int iter = 0;
  double rnorm = bnorm;
  // The recurrence residual drifts from the true one; restart from the true
  // residual until the true residual meets the target.
  for (int restart = 0; restart < 5; ++restart) {
    pc_->apply(r, z);
    p = z;
    double rz = dot(r, z);
    while (rnorm > std::max(target, attainable_residual(norm_inf_, x)) && iter < config_.max_iters) {
      a_.multiply(p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) throw SolverError("conjugate gradients: matrix is not positive definite", rnorm / bnorm, iter);
      const double alpha = rz / pq;
      axpy(alpha, p, x);
      axpy(-alpha, q, r);
      rnorm = norm2(r);
      ++iter;
      if (rnorm <= std::max(target, attainable_residual(norm_inf_, x))) break;
      pc_->apply(r, z);
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    a_.multiply(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    rnorm = norm2(r);
    if (rnorm <= std::max(target, attainable_residual(norm_inf_, x)) || iter >= config_.max_iters) break;
  }
  if (stats) *stats = {iter, rnorm / bnorm};
  if (rnorm > std::max(target, attainable_residual(norm_inf_, x))) {
    std::ostringstream msg;
    msg << "conjugate gradients did not converge in " << iter << " iterations (relative residual "
        << rnorm / bnorm << ", target " << config_.linear_tol << ")";
    throw SolverError(msg.str(), rnorm / bnorm, iter);
  }
  return x;
}

Vector spd_solve(const SparseSymMatrix& a, std::span<const double> b, const SolverConfig& config,
                 LinearSolveStats* stats) {
  return SpdSolver(a, config).solve(b, stats);
}

Vector sym_indefinite_solve(const SparseSymMatrix& a, std::span<const double> b, const SolverConfig& config,
                            const Preconditioner* pc, LinearSolveStats* stats) {
  config.validate();
  const std::size_t n = a.dim();
  if (b.size() != n) throw std::invalid_argument("right-hand side does not match the matrix");

  std::unique_ptr<Preconditioner> jacobi;
  if (!pc) {
    jacobi = std::make_unique<JacobiPreconditioner>(a);
    pc = jacobi.get();
  }

  Vector x(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }
  const double target = config.linear_tol * bnorm;
  const double eps = std::numeric_limits<double>::epsilon();
  const double norm_inf_a = a.norm_inf();
  auto accepted = [&](double r) { return r <= std::max(target, attainable_residual(norm_inf_a, x)); };

  Vector r1(n), r2(n), y(n), v(n), w(n), w1(n), w2(n), ax(n);
  auto true_residual = [&] {
    a.multiply(x, ax);
    for (std::size_t i = 0; i < n; ++i) r1[i] = b[i] - ax[i];
    return norm2(r1);
  };

  int iter = 0;
  double rnorm = bnorm;
  for (int restart = 0; restart < 5 && iter < config.max_iters; ++restart) {
    // Paige-Saunders MINRES on A d = b - A x with an SPD preconditioner, d0 = 0,
    // accumulated directly into x. The recurrence residual drifts from the true
    // one, so the outer loop restarts from the true residual.
    if (restart > 0) rnorm = true_residual();
    else r1.assign(b.begin(), b.end());
    r2 = r1;
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(w2.begin(), w2.end(), 0.0);
    pc->apply(r1, y);
    double beta1 = dot(r1, y);
    if (!(beta1 > 0.0)) throw std::invalid_argument("MINRES preconditioner is not positive definite");
    beta1 = std::sqrt(beta1);

    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0, tnorm2 = 0.0, gmax = 0.0, gmin = std::numeric_limits<double>::max();
    // phibar estimates the residual in the preconditioner norm; the true 2-norm
    // is checked whenever the estimate crosses `check_level`.
    double check_level = beta1 * std::max(target, attainable_residual(norm_inf_a, x)) / rnorm;
    bool restart_needed = false;
    double last_check = std::numeric_limits<double>::infinity();

    for (int local = 1; iter < config.max_iters; ++local) {
      ++iter;
      const double s = 1.0 / beta;
      for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
      a.multiply(v, y);
      if (local >= 2) axpy(-beta / oldb, r1, y);
      const double alfa = dot(v, y);
      axpy(-alfa / beta, r2, y);
      std::swap(r1, r2);
      r2 = y;
      pc->apply(r2, y);
      oldb = beta;
      const double bb = dot(r2, y);
      if (bb < 0.0) throw std::invalid_argument("MINRES preconditioner is not positive definite");
      beta = std::sqrt(bb);
      tnorm2 += alfa * alfa + oldb * oldb + beta * beta;

      const double oldeps = epsln;
      const double delta = cs * dbar + sn * alfa;
      const double gbar = sn * dbar - cs * alfa;
      epsln = sn * beta;
      dbar = -cs * beta;
      double gamma = std::hypot(gbar, beta);
      gamma = std::max(gamma, eps);
      cs = gbar / gamma;
      sn = beta / gamma;
      const double phi = cs * phibar;
      phibar = sn * phibar;

      std::swap(w1, w2);  // w1 <- old w2
      std::swap(w2, w);   // w2 <- old w, w <- scratch
      for (std::size_t i = 0; i < n; ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
      axpy(phi, w, x);

      gmax = std::max(gmax, gamma);
      gmin = std::min(gmin, gamma);
      const double tnorm = std::sqrt(tnorm2);
      const bool invariant = beta <= eps * tnorm;
      const bool ill = gmax / gmin >= 0.1 / eps;

      if (phibar <= check_level || invariant || ill) {
        // r1 and r2 hold the recurrence; evaluate the true residual separately
        a.multiply(x, ax);
        double true_r = 0.0;
        for (std::size_t i = 0; i < n; ++i) true_r += (b[i] - ax[i]) * (b[i] - ax[i]);
        rnorm = std::sqrt(true_r);
        if (accepted(rnorm)) break;
        if (invariant) {
          std::ostringstream msg;
          msg << "MINRES: Krylov space became invariant with relative residual " << rnorm / bnorm
              << "; the operator is singular, regularize the shift";
          throw SingularShiftError(msg.str(), rnorm / bnorm, iter);
        }
        if (ill) {
          std::ostringstream msg;
          msg << "MINRES: operator condition estimate " << gmax / gmin
              << " exceeds machine precision; the operator is singular, regularize the shift";
          throw SingularShiftError(msg.str(), rnorm / bnorm, iter);
        }
        const double ratio = std::max(target, attainable_residual(norm_inf_a, x)) / rnorm;
        if (ratio < 1e-2 || rnorm > 0.5 * last_check) {
          // the estimate is far below the true residual, or the true residual stalls
          restart_needed = true;
          break;
        }
        last_check = rnorm;
        check_level = phibar * std::max(0.1, ratio);
      }
    }
    if (!restart_needed) break;
  }
  rnorm = true_residual();
  if (stats) *stats = {iter, rnorm / bnorm};
  if (!accepted(rnorm)) {
    std::ostringstream msg;
    msg << "MINRES did not converge in " << iter << " iterations (relative residual " << rnorm / bnorm
        << ", target " << config.linear_tol << ")";
    throw SolverError(msg.str(), rnorm / bnorm, iter);
  }
  return x;
}

Vector sym_indefinite_direct_solve(const SparseSymMatrix& a, std::span<const double> b, const SolverConfig& config,
                                   LinearSolveStats* stats) {
  config.validate();
  const std::size_t n = a.dim();
  if (b.size() != n) throw std::invalid_argument("right-hand side does not match the matrix");
  Vector x(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(lower_triangle(a));
  if (ldlt.info() != Eigen::Success) throw SingularShiftError("LDL^T factorization hit a zero pivot", 1.0, 0);
  const double norm_inf_a = a.norm_inf();
  const double target = config.linear_tol * bnorm;
  const auto sn = static_cast<Eigen::Index>(n);

  Vector r(b.begin(), b.end()), ax(n);
  double rnorm = bnorm;
  int iter = 0;
  // iterative refinement; the factorization is unpivoted, so check that it helps
  for (; iter < 20; ++iter) {
    Vector dx(n);
    Eigen::Map<Eigen::VectorXd>(dx.data(), sn) = ldlt.solve(Eigen::Map<const Eigen::VectorXd>(r.data(), sn));
    axpy(1.0, dx, x);
    a.multiply(x, ax);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    const double next = norm2(r);
    if (!std::isfinite(next)) throw SingularShiftError("LDL^T solve produced non-finite values", 1.0, iter + 1);
    const bool done = next <= std::max(target, attainable_residual(norm_inf_a, x));
    const bool stalled = next > 0.5 * rnorm;
    rnorm = next;
    if (done) {
      ++iter;
      break;
    }
    if (stalled) {
      std::ostringstream msg;
      msg << "LDL^T refinement stalled at relative residual " << rnorm / bnorm;
      throw SolverError(msg.str(), rnorm / bnorm, iter + 1);
    }
  }
  if (stats) *stats = {iter, rnorm / bnorm};
  if (rnorm > std::max(target, attainable_residual(norm_inf_a, x)))
    throw SolverError("LDL^T refinement did not converge", rnorm / bnorm, iter);
  return x;
}

}  // namespace crtg
