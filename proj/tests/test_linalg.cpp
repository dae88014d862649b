#include <doctest.h>

#include <random>

#include "driftcomp/linalg.hpp"

using namespace driftcomp;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

}  // namespace

TEST_CASE("mat_vec examples") {
  Vector v(3);
  v << 1, 2, 3;
  CHECK(mat_vec(Matrix::Identity(3, 3), v) == v);

  const Matrix m = make_matrix<double>(2, 2, {1, 2, 3, 4});
  Vector ones(2);
  ones << 1, 1;
  const Vector r = mat_vec(m, ones);
  CHECK(r(0) == 3);
  CHECK(r(1) == 7);

  Vector x(2);
  x << 5, 7;
  CHECK(mat_vec(Matrix::Zero(2, 2), x).isZero(0));

  CHECK_THROWS_AS(mat_vec(m, v), Error);
}

TEST_CASE("mat_mul examples") {
  const Matrix m = make_matrix<double>(2, 2, {1, 2, 3, 4});
  CHECK(mat_mul(Matrix::Identity(2, 2), m) == m);
  const Matrix row = make_matrix<double>(1, 2, {1, 1});
  const Matrix col = make_matrix<double>(2, 1, {2, 3});
  CHECK(mat_mul(row, col)(0, 0) == 5);
  CHECK(mat_mul(Matrix::Zero(2, 2), Matrix::Ones(2, 5)).isZero(0));
  CHECK_THROWS_AS(mat_mul(row, row), Error);
}

TEST_CASE("row-major storage and finiteness on construction") {
  const Matrix m = make_matrix<double>(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.data()[1] == 2);
  CHECK(m(1, 0) == 4);
  CHECK_THROWS_AS(make_matrix<double>(1, 1, {std::nan("")}), Error);
  CHECK_THROWS_AS(make_matrix<double>(2, 2, {1, 2, 3}), Error);
}

TEST_CASE("solve_least_squares examples") {
  SUBCASE("identity system") {
    const Matrix b = make_matrix<double>(3, 1, {1, 2, 3});
    const Matrix x = solve_least_squares<double>(Matrix::Identity(3, 3), b, 0.0);
    CHECK((x - b).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("two observations of one unknown") {
    // normal equations: 2x = 4
    const Matrix a = make_matrix<double>(2, 1, {1, 1});
    const Matrix b = make_matrix<double>(2, 1, {1, 3});
    CHECK(solve_least_squares<double>(a, b, 0.0)(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("exact line y = 2t + 1") {
    Matrix a(20, 2);
    Matrix b(20, 1);
    for (int i = 0; i < 20; ++i) {
      const double t = -20.0 + 4.0 * i;
      a(i, 0) = 1;
      a(i, 1) = t;
      b(i, 0) = 2 * t + 1;
    }
    const Matrix x = solve_least_squares<double>(a, b, 0.0);
    CHECK(std::abs(x(0, 0) - 1.0) < 1e-9);
    CHECK(std::abs(x(1, 0) - 2.0) < 1e-9);
  }
}

TEST_CASE("solve_least_squares errors") {
  const Matrix collinear = make_matrix<double>(3, 2, {1, 2, 1, 2, 1, 2});
  const Matrix b = Matrix::Ones(3, 1);
  try {
    solve_least_squares<double>(collinear, b, 0.0);
    FAIL("expected singularity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Singularity);
    CHECK(std::string(e.what()).find("rank 1 of 2") != std::string::npos);
  }
  CHECK_THROWS_AS(solve_least_squares<double>(collinear, Matrix::Ones(2, 1), 0.0), Error);
  CHECK_THROWS_AS(solve_least_squares<double>(Matrix::Ones(1, 2), Matrix::Ones(1, 1), 0.0),
                  Error);
}

TEST_CASE("least-squares residual satisfies the normal equations") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 50, 6);
    const Matrix b = random_matrix(rng, 50, 3);
    const double ridge = trial % 2 == 0 ? 0.0 : 1e-3;
    const Matrix x = solve_least_squares<double>(a, b, ridge);
    const Matrix resid = a.transpose() * (a * x - b) + ridge * x;
    const double scale = 1.0 + (a.transpose() * b).cwiseAbs().maxCoeff();
    CHECK(resid.cwiseAbs().maxCoeff() <= 1e-8 * scale);
  }
}

TEST_CASE("mat_mul is associative and pure") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 4, 4);
    const Matrix b = random_matrix(rng, 4, 4);
    const Matrix c = random_matrix(rng, 4, 4);
    const Matrix lhs = mat_mul(mat_mul(a, b), c);
    const Matrix rhs = mat_mul(a, mat_mul(b, c));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(mat_mul(a, b) == mat_mul(a, b));
  }
}
