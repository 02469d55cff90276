#include <cmath>
#include <complex>
#include <vector>

#include <doctest.h>

#include "formspec/eigen.hpp"
#include "formspec/errors.hpp"
#include "formspec/mesh.hpp"
#include "formspec/operators.hpp"

using namespace formspec;
using namespace formspec::eigen;

TEST_CASE("sparse solver matches the dense reference on the sphere") {
  const auto m = mesh::generate_icosphere(1.0, 3);
  const auto op = operators::connection_laplacian_1forms(m, operators::build_connection(m));
  SolverConfig cfg;
  cfg.k = 8;
  const auto sparse = smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg);
  const auto dense = dense_eigenpairs(op.stiffness, op.mass.matrix, 8);
  REQUIRE(sparse.values.size() == 8);
  for (int i = 0; i < 8; ++i) {
    CAPTURE(i);
    CHECK(sparse.values[i] == doctest::Approx(dense.values[i]).epsilon(1e-9));
    CHECK(sparse.residuals[i] < cfg.tol);
  }
  // M-orthonormal columns
  const Eigen::MatrixXcd gram = sparse.vectors.adjoint() * (op.mass.matrix * sparse.vectors);
  CHECK((gram - Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-10);
}

TEST_CASE("real pencils and zero modes") {
  const auto m = mesh::generate_flat_torus(2.0, 2.0, 10, 10);
  const auto op = operators::cotan_laplacian(m);
  SolverConfig cfg;
  cfg.k = 5;
  const auto r = smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg);
  CHECK(count_zero_modes(r) == 1);
  const auto first = first_positive(r);
  REQUIRE(first.has_value());
  const auto dense = dense_eigenpairs(op.stiffness, op.mass.matrix, 5);
  CHECK(*first == doctest::Approx(dense.values[1]).epsilon(1e-9));
  CHECK(r.operator_scale > 0.0);
}

TEST_CASE("same seed gives bitwise identical results") {
  const auto m = mesh::generate_icosphere(1.0, 3);
  const auto op = operators::cotan_laplacian(m);
  SolverConfig cfg;
  cfg.k = 6;
  const auto a = smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg);
  const auto b = smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg);
  CHECK(a.values == b.values);
  CHECK(a.iterations == b.iterations);
  CHECK(a.vectors == b.vectors);
  cfg.seed += 1;
  const auto c = smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg);
  for (int i = 0; i < 6; ++i) CHECK(c.values[i] == doctest::Approx(a.values[i]).epsilon(1e-9));
}

TEST_CASE("non-convergence reports the best residuals") {
  const auto m = mesh::generate_icosphere(1.0, 3);
  const auto op = operators::cotan_laplacian(m);
  SolverConfig cfg;
  cfg.k = 6;
  cfg.tol = 1e-30;
  cfg.max_iter = 2;
  try {
    smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg);
    FAIL("expected NotConverged");
  } catch (const NotConverged& e) {
    CHECK(e.iterations == 2);
    CHECK(e.best_residuals.size() == 6);
  }
}

TEST_CASE("invalid configurations") {
  const auto m = mesh::generate_icosphere(1.0, 0);
  const auto op = operators::cotan_laplacian(m);
  SolverConfig cfg;
  cfg.k = 0;
  CHECK_THROWS_AS(smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg), DomainError);
  cfg.k = 12;
  CHECK_THROWS_AS(smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg), DomainError);
  cfg.k = 2;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg), DomainError);
  Eigen::SparseMatrix<double> small(3, 3);
  small.setIdentity();
  cfg.tol = 1e-8;
  CHECK_THROWS_AS(smallest_eigenpairs(op.stiffness, small, cfg), DomainError);
  CHECK_THROWS_AS(dense_eigenpairs(op.stiffness, op.mass.matrix, 13), DomainError);
}

TEST_CASE("clustering by relative gap") {
  const std::vector<double> v = {0.0, 1e-12, 1.0, 1.001, 1.015, 2.0, 2.05, 2.06};
  const auto c = cluster_multiplicities(v);
  REQUIRE(c.size() == 4);
  CHECK(c[0].count == 2);
  CHECK(c[1].count == 3);
  CHECK(c[1].value == doctest::Approx((1.0 + 1.001 + 1.015) / 3.0));
  CHECK(c[2].count == 1);
  CHECK(c[3].count == 2);
  CHECK(cluster_multiplicities(std::vector<double>{}).empty());
  // chaining: each consecutive gap is small even though the ends are far apart
  const auto chain = cluster_multiplicities(std::vector<double>{1.0, 1.015, 1.03, 1.045});
  CHECK(chain.size() == 1);
}
