#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bcs/linops.hpp"
#include "test_util.hpp"

using namespace bcs;
using linops::expm;
using linops::operator_norm;
using linops::semigroup_bounds;

TEST_CASE("expm of the zero matrix is the identity") {
  Matrix<double> zero = Matrix<double>::Zero(3, 3);
  Matrix<double> e = expm(zero, 5.0);
  CHECK((e - Matrix<double>::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("expm of a diagonal matrix exponentiates the diagonal") {
  Matrix<double> a = Matrix<double>::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  Matrix<double> e = expm(a, 1.0);
  CHECK(e(0, 0) == doctest::Approx(2.718281828459045).epsilon(1e-13));
  CHECK(e(1, 1) == doctest::Approx(7.389056098930650).epsilon(1e-13));
  CHECK(std::abs(e(0, 1)) <= 1e-15);
  CHECK(std::abs(e(1, 0)) <= 1e-15);
}

TEST_CASE("expm of the rotation generator at t = pi/2 rotates by a quarter turn") {
  Matrix<double> e = expm(testutil::rotation_generator(), M_PI / 2.0);
  Matrix<double> expected(2, 2);
  expected << 0.0, -1.0, 1.0, 0.0;
  CHECK((e - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("expm at t = 0 is the identity") {
  std::mt19937_64 gen(11);
  Matrix<double> a = testutil::random_matrix(gen, 5, 3.0);
  CHECK((expm(a, 0.0) - Matrix<double>::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("expm rejects non-finite input") {
  Matrix<double> a = Matrix<double>::Zero(2, 2);
  a(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(expm(a, 1.0), InvalidInputError);
  Matrix<double> ok = Matrix<double>::Identity(2, 2);
  CHECK_THROWS_AS(expm(ok, std::numeric_limits<double>::infinity()), InvalidInputError);
  Matrix<double> rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(operator_norm(rect), InvalidInputError);
}

TEST_CASE("semigroup law holds entrywise") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + static_cast<int>(gen() % 5);
    Matrix<double> a = testutil::random_matrix(gen, dim, 2.0);
    const double s = rng::uniform(gen, 0.0, 2.0);
    const double t = rng::uniform(gen, 0.0, 2.0);
    Matrix<double> whole = expm(a, s + t);
    Matrix<double> split = expm(a, s) * expm(a, t);
    const double scale = 1.0 + whole.cwiseAbs().maxCoeff();
    CHECK((whole - split).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  }
}

TEST_CASE("semigroup law up to norm(A)(s+t) = 50") {
  std::mt19937_64 gen(25);
  Matrix<double> a = testutil::random_matrix(gen, 4, 1.0);
  a *= 10.0 / linops::operator_norm(a);
  const double s = 2.0, t = 3.0;  // norm(A) * (s + t) = 50
  Matrix<double> whole = expm(a, s + t);
  Matrix<double> split = expm(a, s) * expm(a, t);
  const double scale = 1.0 + whole.cwiseAbs().maxCoeff();
  CHECK((whole - split).cwiseAbs().maxCoeff() <= 1e-10 * scale);
}

TEST_CASE("semigroup law in the complex field") {
  std::mt19937_64 gen(22);
  Matrix<Complex> a(3, 3);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      a(r, c) = Complex(rng::uniform(gen, -1.0, 1.0), rng::uniform(gen, -1.0, 1.0));
    }
  }
  Matrix<Complex> whole = expm(a, 3.0);
  Matrix<Complex> split = expm(a, 1.25) * expm(a, 1.75);
  const double scale = 1.0 + whole.cwiseAbs().maxCoeff();
  CHECK((whole - split).cwiseAbs().maxCoeff() <= 1e-10 * scale);
}

TEST_CASE("operator_norm closed forms") {
  CHECK(operator_norm<double>(Matrix<double>::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-12));

  Matrix<double> diag = Matrix<double>::Zero(2, 2);
  diag(0, 0) = 3.0;
  diag(1, 1) = -5.0;
  CHECK(operator_norm(diag) == doctest::Approx(5.0).epsilon(1e-12));

  Matrix<double> nil(2, 2);
  nil << 0.0, 2.0, 0.0, 0.0;
  CHECK(operator_norm(nil) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("operator_norm agrees with the eigenvalue route on random matrices") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + static_cast<int>(gen() % 6);
    Matrix<double> a = testutil::random_matrix(gen, dim, 4.0);
    // Independent route: sqrt of the top eigenvalue of A^T A.
    Eigen::SelfAdjointEigenSolver<Matrix<double>> es(a.transpose() * a);
    const double expected = std::sqrt(es.eigenvalues().maxCoeff());
    CHECK(operator_norm(a) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("semigroup_bounds closed forms") {
  auto skew = semigroup_bounds(testutil::rotation_generator());
  CHECK(skew.m == 1.0);
  CHECK(std::abs(skew.omega) <= 1e-14);

  Matrix<double> diag = Matrix<double>::Zero(2, 2);
  diag(0, 0) = -1.0;
  diag(1, 1) = -2.0;
  auto stable = semigroup_bounds(diag);
  CHECK(stable.omega == doctest::Approx(-1.0).epsilon(1e-12));

  // Jordan block: Hermitian part has eigenvalues +-1/2.
  Matrix<double> jordan(2, 2);
  jordan << 0.0, 1.0, 0.0, 0.0;
  auto sheared = semigroup_bounds(jordan);
  CHECK(sheared.omega == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("Jordan block growth stays below exp(omega t) over [0, 10]") {
  Matrix<double> jordan(2, 2);
  jordan << 0.0, 1.0, 0.0, 0.0;
  auto b = semigroup_bounds(jordan);
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.1 * i;
    CHECK(operator_norm(expm(jordan, t)) <= b.m * std::exp(b.omega * t) * (1.0 + 1e-8));
  }
}

TEST_CASE("growth certificate holds on random instances") {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + static_cast<int>(gen() % 5);
    Matrix<double> a = testutil::random_matrix(gen, dim, 2.0);
    auto b = semigroup_bounds(a);
    CHECK(b.m == 1.0);
    for (int i = 0; i < 100; ++i) {
      const double t = rng::uniform(gen, 0.0, 5.0);
      const double norm = operator_norm(expm(a, t));
      CHECK(norm <= b.m * std::exp(b.omega * t) * (1.0 + 1e-8));
    }
  }
}

TEST_CASE("semigroup_bounds of a Schrodinger generator is isometric") {
  // A = -iH with H Hermitian: the Hermitian part of A vanishes.
  Matrix<Complex> h(3, 3);
  h << Complex(1.0, 0.0), Complex(0.2, 0.5), Complex(0.0, -0.3),
      Complex(0.2, -0.5), Complex(2.0, 0.0), Complex(0.4, 0.0),
      Complex(0.0, 0.3), Complex(0.4, 0.0), Complex(3.0, 0.0);
  Matrix<Complex> a = Complex(0.0, -1.0) * h;
  auto b = semigroup_bounds(a);
  CHECK(std::abs(b.omega) <= 1e-12);
  CHECK(operator_norm(expm(a, 2.0)) == doctest::Approx(1.0).epsilon(1e-10));
}
