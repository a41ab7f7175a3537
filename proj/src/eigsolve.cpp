#include "crtg/eigsolve.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace crtg {

double rayleigh_quotient(std::span<const double> u, const SparseSymMatrix& a, const SparseSymMatrix& m) {
  if (u.size() != a.dim() || u.size() != m.dim())
    throw std::invalid_argument("Rayleigh quotient: dimension mismatch");
  const double den = m.quadratic_form(u);
  if (!(den > 0.0)) throw std::domain_error("Rayleigh quotient: u^T M u is not positive");
  return a.quadratic_form(u) / den;
}

namespace {

// Removes the M-projection of w onto every vector in `basis` (two passes).
void m_orthogonalize(Vector& w, const std::vector<Vector>& basis, const std::vector<Vector>& m_basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t i = 0; i < basis.size(); ++i) axpy(-dot(m_basis[i], w), basis[i], w);
}

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

// Inner solves are only accurate to their own rounding level, so the computed
// eigen-residual stalls at a modest multiple of eps (||A|| + |w| ||M||) ||u||.
constexpr double kFloorFactor = 100.0;
// Pairs are locked well below eig_tol: later pairs are orthogonalized against
// them and inherit their error.
constexpr double kLockFactor = 1e-2;
constexpr int kMaxIdleRestarts = 8;

struct Candidate {
  double omega;
  Vector u;
  double residual;
  double ref;    // ||A u||
  double floor;  // rounding level of the computed residual
};

Candidate make_candidate(Vector u, const SparseSymMatrix& a, const SparseSymMatrix& m, double norm_a, double norm_m) {
  const double energy = std::sqrt(a.quadratic_form(u));
  for (double& x : u) x /= energy;
  const double omega = rayleigh_quotient(u, a, m);
  Vector au = a.multiply(u);
  const double ref = norm2(au);
  axpy(-omega, m.multiply(u), au);
  const double floor =
      kFloorFactor * std::numeric_limits<double>::epsilon() * (norm_a + std::abs(omega) * norm_m) * norm2(u);
  return {omega, std::move(u), norm2(au), ref, floor};
}

}  // namespace

std::vector<EigenPair> smallest_eigenpairs(const SparseSymMatrix& a, const SparseSymMatrix& m, int k,
                                           const SolverConfig& config) {
  config.validate();
  const std::size_t n = a.dim();
  if (m.dim() != n) throw std::invalid_argument("eigenproblem: A and M differ in dimension");
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw std::invalid_argument("eigenproblem: k must lie in [1, dim]");
  const auto wanted_total = static_cast<std::size_t>(k);

  const SpdSolver solver(a, config);
  const double norm_a = a.norm_inf();
  const double norm_m = m.norm_inf();
  std::mt19937_64 rng(config.seed);

  std::vector<Vector> locked, m_locked;
  std::vector<EigenPair> pairs;

  // Thick-restart Lanczos: A^{-1} M Q = Q T + w e_last^T with Q M-orthonormal
  // and orthogonal to the locked vectors. T is kept dense; after a restart it
  // is a diagonal block plus one coupling row.
  std::vector<Vector> q, mq;
  Eigen::MatrixXd t(0, 0);
  Vector coupling;  // lower-triangle row of T for the next basis vector

  // Orthonormalizes v against locked vectors and the basis and appends it.
  auto append = [&](Vector v) {
    m_orthogonalize(v, locked, m_locked);
    m_orthogonalize(v, q, mq);
    const double norm = std::sqrt(std::max(0.0, m.quadratic_form(v)));
    if (!(norm > 0.0)) return false;
    for (double& x : v) x /= norm;
    mq.push_back(m.multiply(v));
    q.push_back(std::move(v));
    const auto size = static_cast<Eigen::Index>(q.size());
    t.conservativeResize(size, size);
    t.row(size - 1).setZero();
    t.col(size - 1).setZero();
    for (Eigen::Index i = 0; i + 1 < size; ++i) {
      const double c = static_cast<std::size_t>(i) < coupling.size() ? coupling[static_cast<std::size_t>(i)] : 0.0;
      t(size - 1, i) = c;
      t(i, size - 1) = c;
    }
    coupling.clear();
    return true;
  };
  auto append_random = [&] {
    for (int attempt = 0; attempt < 10; ++attempt) {
      coupling.clear();
      if (append(random_vector(n, rng))) return;
    }
    throw SolverError("eigensolver could not extend the Krylov basis", 1.0, 0);
  };

  append_random();
  int steps = 0;
  int idle_restarts = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  double cycle_best = best_residual;
  double trigger = 0.1 * config.eig_tol;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz;

  while (pairs.size() < wanted_total) {
    const std::size_t free = n - locked.size();
    const std::size_t cap = std::min<std::size_t>(free, std::max<std::size_t>(3 * wanted_total + 15, 25));
    const std::size_t wanted = wanted_total - pairs.size();

    const std::size_t j = q.size() - 1;
    Vector w = solver.solve(mq[j]);
    ++steps;
    if (steps > config.max_iters) throw SolverError("eigensolver exceeded max_iters Lanczos steps", 1.0, steps);
    m_orthogonalize(w, locked, m_locked);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i <= j; ++i) {
        const double c = dot(mq[i], w);
        axpy(-c, q[i], w);
        if (i == j) t(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += c;
      }
    const double b = std::sqrt(std::max(0.0, m.quadratic_form(w)));

    const auto size = static_cast<Eigen::Index>(j + 1);
    ritz.compute(t);  // reads the lower triangle
    // eigenvalues ascending; the wanted ones (largest theta = smallest omega) are last
    const std::size_t available = std::min(wanted, j + 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < available; ++i) {
      const Eigen::Index col = size - 1 - static_cast<Eigen::Index>(i);
      worst = std::max(worst, std::abs(b * ritz.eigenvectors()(size - 1, col)) / std::abs(ritz.eigenvalues()[col]));
    }
    const bool invariant = b <= 1e-14 * std::abs(ritz.eigenvalues()[size - 1]) || j + 1 >= free;
    const bool full = j + 1 >= cap;

    if (!((available == wanted && worst <= trigger) || invariant || full)) {
      for (double& x : w) x /= b;
      coupling.assign(j + 1, 0.0);
      coupling[j] = b;
      append(std::move(w));
      continue;
    }

    auto ritz_combination = [&](const std::vector<Vector>& basis, std::size_t i) {
      const Eigen::Index col = size - 1 - static_cast<Eigen::Index>(i);
      Vector u(n, 0.0);
      for (std::size_t r = 0; r <= j; ++r) axpy(ritz.eigenvectors()(static_cast<Eigen::Index>(r), col), basis[r], u);
      return u;
    };
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < available; ++i) {
      // one inverse-iteration step: the residual of A^{-1} M y is not amplified
      // by the small Lanczos coefficients that built y
      Vector u = solver.solve(m.multiply(ritz_combination(q, i)));
      m_orthogonalize(u, locked, m_locked);
      Candidate c = make_candidate(std::move(u), a, m, norm_a, norm_m);
      if (c.residual > std::max(kLockFactor * config.eig_tol * c.ref, c.floor)) {
        cycle_best = std::min(cycle_best, c.residual / c.ref);
        break;
      }
      m_locked.push_back(m.multiply(c.u));
      locked.push_back(c.u);
      pairs.push_back({c.omega, std::move(c.u), c.residual, steps});
      ++accepted;
    }
    if (pairs.size() >= wanted_total) break;

    if (accepted == 0 && !invariant && !full) {
      // estimate was optimistic; keep extending
      trigger = 0.1 * worst;
      for (double& x : w) x /= b;
      coupling.assign(j + 1, 0.0);
      coupling[j] = b;
      append(std::move(w));
      continue;
    }

    if (full && accepted == 0) {
      if (cycle_best < 0.5 * best_residual) {
        idle_restarts = 0;
      } else if (++idle_restarts >= kMaxIdleRestarts) {
        const double achieved = std::min(best_residual, cycle_best);
        std::ostringstream msg;
        msg << "eigensolver stagnated after " << steps << " Lanczos steps: relative residual " << achieved
            << " for pair " << pairs.size() + 1 << " (target " << config.eig_tol << ")";
        throw SolverError(msg.str(), achieved, steps);
      }
      best_residual = std::min(best_residual, cycle_best);
    } else if (accepted > 0) {
      idle_restarts = 0;
      best_residual = std::numeric_limits<double>::infinity();
    }
    cycle_best = std::numeric_limits<double>::infinity();
    trigger = 0.1 * config.eig_tol;

    // thick restart: keep the leading unconverged Ritz vectors
    const std::size_t remaining = j + 1 - accepted;
    const std::size_t keep = full ? std::min(remaining, std::max(wanted - accepted + 2, cap / 2)) : remaining;
    std::vector<Vector> new_q, new_mq;
    Eigen::MatrixXd new_t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(keep), static_cast<Eigen::Index>(keep));
    Vector new_coupling(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t idx = accepted + i;
      const Eigen::Index col = size - 1 - static_cast<Eigen::Index>(idx);
      new_q.push_back(ritz_combination(q, idx));
      new_mq.push_back(ritz_combination(mq, idx));
      new_t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = ritz.eigenvalues()[col];
      new_coupling[i] = b * ritz.eigenvectors()(size - 1, col);
    }
    q = std::move(new_q);
    mq = std::move(new_mq);
    t = std::move(new_t);
    if (invariant || q.size() + locked.size() >= n) {
      append_random();
    } else {
      for (double& x : w) x /= b;
      coupling = std::move(new_coupling);
      if (!append(std::move(w))) append_random();
    }
  }

  // Locked vectors were made M-orthogonal through the Krylov bases; normalize,
  // fix signs and order.
  for (EigenPair& p : pairs) {
    const auto big = std::max_element(p.u.begin(), p.u.end(),
                                      [](double x, double y) { return std::abs(x) < std::abs(y); });
    if (*big < 0.0)
      for (double& x : p.u) x = -x;
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& x, const EigenPair& y) { return x.omega < y.omega; });
  return pairs;
}

}  // namespace crtg
