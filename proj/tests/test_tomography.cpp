#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "transim/tomography.hpp"

using namespace transim;

TEST_CASE("Pauli basis is orthogonal with norm 8") {
  const auto& b = pauli_basis();
  REQUIRE(b.ops.size() == 64);
  for (int m = 0; m < 64; ++m)
    for (int n = 0; n < 64; ++n) {
      const Complex ip = (b.ops[m].adjoint() * b.ops[n]).trace();
      CHECK(std::abs(ip - (m == n ? 8.0 : 0.0)) < 1e-12);
    }
}

TEST_CASE("input states are physical and span the operator space") {
  const auto in = input_state_set();
  REQUIRE(in.size() == 64);
  Matrix stacked(64, 64);
  for (int k = 0; k < 64; ++k) {
    CHECK(std::abs(in[k].trace() - 1.0) < 1e-14);
    CHECK(is_hermitian(in[k]));
    CHECK(eig_hermitian(Matrix(in[k])).values(0) > -1e-14);
    stacked.col(k) = Eigen::Map<const Vector>(in[k].data(), 64);
  }
  CHECK(Eigen::FullPivLU<Matrix>(stacked).rank() == 64);
  CHECK(std::abs(in[0](0, 0) - 1.0) < 1e-15);
}

TEST_CASE("chi round trip on random unitaries") {
  std::mt19937_64 rng(5);
  const auto in = input_state_set();
  for (int trial = 0; trial < 4; ++trial) {
    const Matrix8 u = testing_util::haar_unitary(8, rng);
    const ChiMatrix ideal = ideal_chi(u);
    const ChiMatrix rec = reconstruct_chi(in, apply_unitary_channel(u, in));
    CHECK((rec.chi - ideal.chi).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((rec.linear - ideal.chi).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(process_fidelity(rec, ideal) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(ideal.chi.trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("process fidelity of a depolarizing channel") {
  const double p = 0.2;
  const auto in = input_state_set();
  std::vector<Matrix8> out;
  for (const auto& rho : in) out.push_back((1.0 - p) * rho + p * Matrix8::Identity() / 8.0);
  const ChiMatrix rec = reconstruct_chi(in, out);
  const ChiMatrix id = ideal_chi(Matrix8::Identity());
  // identity weight: (1 - p) + p / 64; every other Pauli: p / 64
  CHECK(process_fidelity(rec, id) == doctest::Approx(1.0 - p + p / 64.0).epsilon(1e-9));
  CHECK(std::abs(rec.chi(5, 5) - p / 64.0) < 1e-9);
  CHECK(std::abs(rec.chi.trace() - 1.0) < 1e-12);
}

TEST_CASE("reconstructed chi is Hermitian and positive") {
  std::mt19937_64 rng(9);
  const auto in = input_state_set();
  const Matrix8 u = testing_util::haar_unitary(8, rng);
  auto out = apply_unitary_channel(u, in);
  std::normal_distribution<double> noise(0.0, 2e-4);
  for (auto& rho : out) {
    Matrix8 e;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) e(i, j) = {noise(rng), noise(rng)};
    rho += (e + e.adjoint()) / 2.0;
  }
  const ChiMatrix rec = reconstruct_chi(in, out);
  CHECK((rec.chi - rec.chi.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(eig_hermitian(rec.chi).values(0) > -1e-12);
  CHECK(std::abs(rec.chi.trace() - 1.0) < 1e-12);
  CHECK(process_fidelity(rec, ideal_chi(u)) > 0.95);
}

TEST_CASE("ideal chi needs a unitary") {
  Matrix8 m = Matrix8::Identity();
  m(0, 0) = 0.5;
  CHECK_THROWS_AS(ideal_chi(m), ArgumentError);
}

TEST_CASE("full-space inputs are the 8 x 8 set on the dressed vectors") {
  const DressedBasis b = undriven_dressed_basis(paper_device(3));
  const auto full = input_state_set(b);
  const auto small = input_state_set();
  const Matrix c = b.computational_vectors();
  for (int k : {0, 7, 33, 63}) CHECK((c.adjoint() * full[k] * c - small[k]).cwiseAbs().maxCoeff() < 1e-12);
}
