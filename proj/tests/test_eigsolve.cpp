#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "crtg/eigsolve.hpp"

using namespace crtg;

namespace {

Eigen::MatrixXd dense(const SparseSymMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.dim()), static_cast<Eigen::Index>(a.dim()));
  for (std::size_t r = 0; r < a.dim(); ++r)
    for (std::size_t k = a.row_offsets()[r]; k < a.row_offsets()[r + 1]; ++k)
      d(static_cast<Eigen::Index>(r), a.col_indices()[k]) = a.values()[k];
  return d;
}

double relative_residual(const EigenPair& p, const SparseSymMatrix& a, const SparseSymMatrix& m) {
  Vector r = a.multiply(p.u);
  const double ref = norm2(r);
  axpy(-p.omega, m.multiply(p.u), r);
  return norm2(r) / ref;
}

}  // namespace

TEST_CASE("A = M gives unit eigenvalues") {
  const auto m = SparseSymMatrix::diagonal(Vector{1.0, 2.0, 3.0, 4.0});
  const auto pairs = smallest_eigenpairs(m, m, 2, SolverConfig{});
  REQUIRE(pairs.size() == 2);
  for (const auto& p : pairs) CHECK(p.omega == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("diagonal pencil") {
  const auto a = SparseSymMatrix::diagonal(Vector{2.0, 6.0});
  const auto m = SparseSymMatrix::diagonal(Vector{1.0, 2.0});
  const auto pairs = smallest_eigenpairs(a, m, 2, SolverConfig{});
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].omega == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pairs[1].omega == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(rayleigh_quotient(Vector{1.0, 1.0}, a, m) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(rayleigh_quotient(Vector{0.0, 0.0}, a, m), std::domain_error);
  CHECK_THROWS_AS(smallest_eigenpairs(a, m, 3, SolverConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(smallest_eigenpairs(a, m, 0, SolverConfig{}), std::invalid_argument);
}

TEST_CASE("Rayleigh quotient is scale invariant") {
  const AssembledSystem sys = assemble(build_lshape_mesh(8), ElasticParams{1.0, 5.0, 1.0});
  Vector u(sys.dim());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(0.37 * static_cast<double>(i)) + 0.1;
  const double q = rayleigh_quotient(u, sys.stiffness, sys.mass);
  for (double s : {-3.0, 1e-6, 42.0}) {
    Vector v = u;
    for (double& x : v) x *= s;
    CHECK(rayleigh_quotient(v, sys.stiffness, sys.mass) == doctest::Approx(q).epsilon(1e-14));
  }
}

TEST_CASE("agrees with a dense generalized eigensolver") {
  const AssembledSystem sys = assemble(build_unit_square_mesh(4), ElasticParams{1.0, 3.0, 1.0});
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(dense(sys.stiffness), dense(sys.mass));
  const auto pairs = smallest_eigenpairs(sys, 5, SolverConfig{});
  REQUIRE(pairs.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(pairs[i].omega == doctest::Approx(ref.eigenvalues()[i]).epsilon(1e-11));
}

TEST_CASE("eigenpairs on the elasticity problem") {
  const AssembledSystem sys = assemble(build_unit_square_mesh(16), ElasticParams{});
  const SolverConfig config;
  const auto pairs = smallest_eigenpairs(sys, 4, config);
  REQUIRE(pairs.size() == 4);
  CHECK(pairs[0].omega == doctest::Approx(36.968038).epsilon(1e-7));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    CHECK(relative_residual(p, sys.stiffness, sys.mass) <= config.eig_tol);
    CHECK(energy_norm(p.u, sys.stiffness) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rayleigh_quotient(p.u, sys.stiffness, sys.mass) == doctest::Approx(p.omega).epsilon(1e-13));
    const double big = *std::max_element(p.u.begin(), p.u.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    CHECK(big > 0.0);
    if (i > 0) CHECK(pairs[i - 1].omega <= p.omega);
    for (std::size_t j = 0; j < i; ++j) {
      const Vector mu = sys.mass.multiply(pairs[j].u);
      CHECK(std::abs(dot(mu, p.u)) <= 1e-8 * sys.mass.quadratic_form(p.u));
    }
  }
}

TEST_CASE("same seed, same answer") {
  const AssembledSystem sys = assemble(build_lshape_mesh(8), ElasticParams{});
  const auto a = smallest_eigenpairs(sys, 2, SolverConfig{});
  const auto b = smallest_eigenpairs(sys, 2, SolverConfig{});
  CHECK(a[0].omega == b[0].omega);
  CHECK(a[1].u == b[1].u);
}

TEST_CASE("nearly incompressible material stays solvable") {
  const AssembledSystem sys = assemble(build_unit_square_mesh(16), ElasticParams{1.0, 1e5, 1.0});
  const auto pairs = smallest_eigenpairs(sys, 1, SolverConfig{});
  // approaches the lambda -> infinity limit; close to the lambda = 1e3 value
  CHECK(pairs[0].omega == doctest::Approx(51.877).epsilon(1e-4));
}
