#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "helpers.hpp"
#include "transim/operators.hpp"

using namespace transim;
using testing_util::max_abs;

TEST_CASE("ladder commutator is identity except at the truncation edge") {
  for (int d : {2, 3, 5, 7}) {
    const Matrix a = lowering(d);
    const Matrix c = a * a.adjoint() - a.adjoint() * a;
    Matrix expected = Matrix::Identity(d, d);
    expected(d - 1, d - 1) = 1.0 - d;
    CHECK(max_abs(c - expected) < 1e-14);
  }
  CHECK_THROWS_AS(lowering(1), ArgumentError);
}

TEST_CASE("basis index puts subsystem 0 most significant") {
  const HilbertSpace s({5, 5, 5});
  const int lv[] = {1, 2, 3};
  CHECK(s.index(lv) == 1 * 25 + 2 * 5 + 3);
  CHECK(s.levels(38) == std::vector<int>{1, 2, 3});
  for (int k = 0; k < s.size(); ++k) CHECK(s.index(s.levels(k)) == k);
}

TEST_CASE("embedded number operator counts the right digit") {
  const HilbertSpace s({3, 4, 2});
  for (int q = 0; q < 3; ++q) {
    const Matrix n = number(s, q).matrix;
    for (int k = 0; k < s.size(); ++k) {
      CHECK(n(k, k).real() == doctest::Approx(s.levels(k)[q]));
    }
    CHECK(max_abs(n - Matrix(n.diagonal().asDiagonal())) < 1e-15);
  }
  // creation is the adjoint of annihilation and they compose to the number operator
  const Matrix a = annihilation(s, 1).matrix;
  CHECK(max_abs(creation(s, 1).matrix - a.adjoint()) == 0.0);
  CHECK(max_abs(a.adjoint() * a - number(s, 1).matrix) < 1e-14);
}

TEST_CASE("operators on different subsystems commute") {
  const HilbertSpace s({3, 3, 3});
  const Matrix a0 = annihilation(s, 0).matrix;
  const Matrix a2 = creation(s, 2).matrix;
  CHECK(max_abs(a0 * a2 - a2 * a0) < 1e-15);
}

TEST_CASE("Hermitian eigensolver reconstructs and rejects non-Hermitian input") {
  std::mt19937_64 rng(7);
  const Matrix h = testing_util::random_hermitian(20, rng);
  const auto e = eig_hermitian(h);
  CHECK(max_abs(e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint() - h) < 1e-12);
  CHECK(max_abs(e.vectors.adjoint() * e.vectors - Matrix::Identity(20, 20)) < 1e-12);
  for (int k = 1; k < 20; ++k) CHECK(e.values(k) >= e.values(k - 1));
  Matrix bad = h;
  bad(0, 1) += 1.0;
  CHECK_THROWS_AS(eig_hermitian(bad), ContractViolation);
}

TEST_CASE("unitary exponential agrees with the Pade matrix exponential") {
  std::mt19937_64 rng(11);
  const Matrix h = testing_util::random_hermitian(12, rng);
  const double t = 0.37;
  const Matrix reference = (Complex(0.0, -t) * h).exp();
  CHECK(max_abs(unitary_exponential(eig_hermitian(h), t) - reference) < 1e-11);
}

TEST_CASE("unit conversions") {
  CHECK(angular_from_ghz(1.0) == doctest::Approx(kTwoPi));
  CHECK(angular_from_mhz(1000.0) == doctest::Approx(kTwoPi));
  CHECK(mhz_from_angular(angular_from_mhz(3.7)) == doctest::Approx(3.7));
}
