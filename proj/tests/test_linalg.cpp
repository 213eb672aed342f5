#include "doctest.h"
#include "helpers.hpp"

#include "mafem/linalg.hpp"

#include <random>

using namespace mafem;

namespace {

SparseSym from_dense(const Eigen::MatrixXd& d) {
  SparseSym s = d.sparseView();
  s.makeCompressed();
  return s;
}

// Symmetric diagonally dominant M-matrix with a random sparsity pattern.
SparseSym random_spd(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < 0.15) {
        const double w = u(rng);
        d(i, j) = d(j, i) = -w;
      }
    }
  }
  for (int i = 0; i < n; ++i) d(i, i) = -d.row(i).sum() + 0.1 + u(rng);
  return from_dense(d);
}

} // namespace

TEST_CASE("identity and 2x2 solves") {
  SparseSym id(5, 5);
  id.setIdentity();
  const Factorization f(id, FactorKind::positive_definite);
  const Vector b = Vector::LinSpaced(5, 1, 5);
  CHECK((f.solve(b) - b).norm() == 0.0);

  Eigen::MatrixXd d(2, 2);
  d << 2, 1, 1, 2;
  const Factorization g(from_dense(d), FactorKind::positive_definite);
  const Vector x = g.solve(Vector::Constant(2, 3.0));
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("random SPD 50x50 against a dense oracle") {
  std::mt19937_64 rng(1);
  const SparseSym s = random_spd(50, rng);
  const Vector b = testing::random_vector(50, rng);
  const Vector oracle = Eigen::MatrixXd(s).partialPivLu().solve(b);
  for (FactorKind k : {FactorKind::positive_definite, FactorKind::indefinite}) {
    const Factorization f(s, k);
    CHECK((f.solve(b) - oracle).norm() <= 1e-10 * oracle.norm());
  }
  const Factorization f(s, FactorKind::indefinite);
  CHECK(f.negative_pivots() == 0);
  CHECK(f.positive_pivots() == 50);
}

TEST_CASE("indefinite factorization reports Sylvester inertia") {
  const auto p = testing::make_problem(generate_cube(2));
  const double sigma = 30.0;
  const SparseSym shifted = p.sys.stiffness - sigma * p.sys.mass;
  const Factorization f(shifted, FactorKind::indefinite);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(testing::dense(p.sys.stiffness),
                                                               testing::dense(p.sys.mass));
  int below = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) below += es.eigenvalues()(i) < sigma;
  CHECK(f.negative_pivots() == below);
  CHECK(f.negative_pivots() + f.positive_pivots() == p.space.n_dofs);
  std::mt19937_64 rng(2);
  const Vector b = testing::random_vector(p.space.n_dofs, rng);
  const Vector x = f.solve_refined(shifted, b);
  CHECK((shifted * x - b).norm() <= 1e-10 * b.norm());
  CHECK_THROWS_AS(Factorization(shifted, FactorKind::positive_definite), FactorizationError);
}

TEST_CASE("factor/solve round trip on assembled matrices") {
  std::mt19937_64 rng(4);
  const auto p = testing::make_problem(generate_cube(4));
  for (const SparseSym* s : {&p.sys.mass, static_cast<const SparseSym*>(nullptr)}) {
    const SparseSym m = s ? *s : SparseSym(p.sys.stiffness + p.sys.mass);
    const Factorization f(m, FactorKind::positive_definite);
    const Vector b = testing::random_vector(p.space.n_dofs, rng);
    CHECK((m * f.solve(b) - b).norm() <= 1e-10 * b.norm());
  }
}

TEST_CASE("pcg") {
  const int n = 40;
  SparseSym diag(n, n);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, i + 1.0);
  diag.setFromTriplets(trips.begin(), trips.end());

  SUBCASE("zero right-hand side") {
    const PcgResult r = pcg(diag, Vector::Zero(n), jacobi_preconditioner(diag), 1e-12, 10);
    CHECK(r.x.norm() == 0.0);
  }
  SUBCASE("Jacobi on a diagonal matrix") {
    const PcgResult r = pcg(diag, Vector::Ones(n), jacobi_preconditioner(diag), 1e-12, 100);
    CHECK(r.iterations <= 5);
    for (int i = 0; i < n; ++i) CHECK(r.x(i) == doctest::Approx(1.0 / (i + 1.0)).epsilon(1e-12));
  }
  SUBCASE("mass matrix against the direct solve") {
    std::mt19937_64 rng(8);
    const auto p = testing::make_problem(generate_cube(3));
    const Vector b = testing::random_vector(p.space.n_dofs, rng);
    const Vector direct = Factorization(p.sys.mass, FactorKind::positive_definite).solve(b);
    const PcgResult r = pcg(p.sys.mass, b, jacobi_preconditioner(p.sys.mass), 1e-13, 1000);
    CHECK((r.x - direct).norm() <= 1e-8 * direct.norm());
  }
  SUBCASE("iteration limit") {
    CHECK_THROWS_AS(pcg(diag, Vector::Ones(n), identity_preconditioner(), 1e-14, 2),
                    ConvergenceError);
  }
}

TEST_CASE("matvec linearity") {
  std::mt19937_64 rng(9);
  const auto p = testing::make_problem(generate_cube(3));
  const Vector x = testing::random_vector(p.space.n_dofs, rng);
  const Vector y = testing::random_vector(p.space.n_dofs, rng);
  const double a = 0.7, b = -1.3;
  const Vector lhs = p.sys.stiffness * (a * x + b * y);
  const Vector rhs = a * (p.sys.stiffness * x) + b * (p.sys.stiffness * y);
  CHECK((lhs - rhs).norm() <= 1e-13 * rhs.norm());
}

TEST_CASE("supernodal probe answers consistently") {
  CHECK(supernodal_available() == supernodal_available());
}
