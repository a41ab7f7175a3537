#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "crtg/cr_elasticity.hpp"
#include "crtg/linear_solvers.hpp"

using namespace crtg;

namespace {

Vector random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

double relative_residual(const SparseSymMatrix& a, const Vector& x, const Vector& b) {
  Vector r = a.multiply(x);
  axpy(-1.0, b, r);
  return norm2(r) / norm2(b);
}

}  // namespace

TEST_CASE("sparse matrix from triplets") {
  const auto a = SparseSymMatrix::from_triplets(3, {{0, 0, 1.0}, {1, 0, 2.0}, {0, 1, 2.0}, {2, 2, 4.0}, {0, 0, 0.5}});
  CHECK(a.dim() == 3);
  CHECK(a.at(0, 0) == 1.5);
  CHECK(a.at(1, 0) == 2.0);
  CHECK(a.at(1, 1) == 0.0);
  CHECK(a.nnz() == 4);
  CHECK(a.is_symmetric());
  CHECK_FALSE(a.is_diagonal());
  CHECK(a.norm_inf() == 4.0);
  const Vector y = a.multiply(Vector{1.0, 1.0, 1.0});
  CHECK(y == Vector{3.5, 2.0, 4.0});
  CHECK(a.quadratic_form(Vector{1.0, 1.0, 1.0}) == 9.5);

  const auto b = SparseSymMatrix::from_triplets(2, {{0, 1, 1.0}});
  CHECK_FALSE(b.is_symmetric());
  CHECK(b.asymmetry() == 1.0);

  const auto sum = a.add_scaled(SparseSymMatrix::identity(3), -1.0);
  CHECK(sum.at(2, 2) == 3.0);
  CHECK(sum.at(1, 1) == -1.0);
  std::ostringstream os;
  a.write_coordinate(os);
  CHECK(os.str().find("1 0 2") != std::string::npos);
}

TEST_CASE("vector helpers") {
  Vector y{1.0, 2.0};
  axpy(2.0, Vector{1.0, -1.0}, y);
  CHECK(y == Vector{3.0, 0.0});
  CHECK(dot(Vector{1, 2, 3}, Vector{4, 5, 6}) == 32.0);
  CHECK(norm2(Vector{3, 4}) == 5.0);
}

TEST_CASE("CG on a 2x2 system") {
  const auto a = SparseSymMatrix::from_triplets(2, {{0, 0, 2}, {0, 1, -1}, {1, 0, -1}, {1, 1, 2}});
  for (auto kind : {PreconditionerKind::jacobi, PreconditionerKind::ic0, PreconditionerKind::cholesky}) {
    SolverConfig config;
    config.preconditioner = kind;
    const Vector x = spd_solve(a, Vector{1.0, 0.0}, config);
    CHECK(x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("preconditioners agree on the elasticity stiffness") {
  const AssembledSystem sys = assemble(build_lshape_mesh(16), ElasticParams{1.0, 50.0, 1.0});
  const Vector b = random_vector(sys.dim(), 3);
  Vector reference;
  for (auto kind : {PreconditionerKind::cholesky, PreconditionerKind::ic0, PreconditionerKind::jacobi}) {
    SolverConfig config;
    config.preconditioner = kind;
    config.linear_tol = 1e-11;
    LinearSolveStats stats;
    const Vector x = spd_solve(sys.stiffness, b, config, &stats);
    CHECK(relative_residual(sys.stiffness, x, b) <= 1e-11);
    CHECK(stats.relative_residual <= 1e-11);
    if (kind == PreconditionerKind::cholesky) {
      CHECK(stats.iterations <= 3);
      reference = x;
    } else {
      Vector diff = x;
      axpy(-1.0, reference, diff);
      CHECK(norm2(diff) <= 1e-7 * norm2(reference));
    }
  }
}

TEST_CASE("CG reports failure past the iteration limit") {
  const AssembledSystem sys = assemble(build_unit_square_mesh(16), ElasticParams{});
  SolverConfig config;
  config.preconditioner = PreconditionerKind::jacobi;
  config.max_iters = 3;
  CHECK_THROWS_AS(spd_solve(sys.stiffness, random_vector(sys.dim(), 1), config), SolverError);
}

TEST_CASE("MINRES on indefinite systems") {
  SolverConfig config;
  const auto d = SparseSymMatrix::diagonal(Vector{1.0, -1.0});
  const Vector x = sym_indefinite_solve(d, Vector{1.0, 1.0}, config);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(-1.0).epsilon(1e-14));

  // shifted elasticity operator, preconditioned by the unshifted stiffness
  const AssembledSystem sys = assemble(build_unit_square_mesh(12), ElasticParams{});
  const SparseSymMatrix shifted = sys.stiffness.add_scaled(sys.mass, -300.0);
  const auto pc = make_preconditioner(PreconditionerKind::cholesky, sys.stiffness);
  const Vector b = random_vector(sys.dim(), 9);
  LinearSolveStats stats;
  const Vector y = sym_indefinite_solve(shifted, b, config, pc.get(), &stats);
  CHECK(relative_residual(shifted, y, b) <= 1e-11);
  CHECK(stats.iterations > 0);
}

TEST_CASE("LDL^T solve of indefinite systems") {
  SolverConfig config;
  const auto d = SparseSymMatrix::diagonal(Vector{1.0, -1.0});
  const Vector x = sym_indefinite_direct_solve(d, Vector{1.0, 1.0}, config);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(-1.0).epsilon(1e-15));

  const AssembledSystem sys = assemble(build_lshape_mesh(12), ElasticParams{1.0, 50.0, 1.0});
  const SparseSymMatrix shifted = sys.stiffness.add_scaled(sys.mass, -500.0);
  const Vector b = random_vector(sys.dim(), 5);
  LinearSolveStats stats;
  const Vector y = sym_indefinite_direct_solve(shifted, b, config, &stats);
  CHECK(relative_residual(shifted, y, b) <= 1e-12);
  const Vector z = sym_indefinite_solve(shifted, b, config, make_preconditioner(PreconditionerKind::cholesky, sys.stiffness).get());
  Vector diff = y;
  axpy(-1.0, z, diff);
  CHECK(norm2(diff) <= 1e-8 * norm2(y));

  // 2x2 toy problem: A = diag(1, 3), M = I, shift 3 hits an eigenvalue exactly
  const auto toy = SparseSymMatrix::diagonal(Vector{1.0, 3.0}).add_scaled(SparseSymMatrix::identity(2), -3.0);
  CHECK_THROWS_AS(sym_indefinite_direct_solve(toy, Vector{1.0, 1.0}, config), SingularShiftError);
  CHECK_THROWS_AS(sym_indefinite_solve(toy, Vector{1.0, 1.0}, config), SingularShiftError);
}

TEST_CASE("MINRES detects a singular shift") {
  SolverConfig config;
  const auto a = SparseSymMatrix::diagonal(Vector{-1.0, 0.0, 1.0});
  CHECK_THROWS_AS(sym_indefinite_solve(a, Vector{1.0, 1.0, 1.0}, config), SingularShiftError);
}

TEST_CASE("solver configuration") {
  SolverConfig config;
  CHECK_NOTHROW(config.validate());
  config.eig_tol = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  CHECK(parse_preconditioner("ic0") == PreconditionerKind::ic0);
  CHECK_THROWS_AS(parse_preconditioner("amg"), std::invalid_argument);
  CHECK(attainable_residual(2.0, Vector{3.0, 4.0}) == doctest::Approx(10.0 * 2.220446049250313e-16));
}
