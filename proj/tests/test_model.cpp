#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "transim/analysis.hpp"
#include "transim/model.hpp"

using namespace transim;
using testing_util::max_abs;

TEST_CASE("device parameter validation") {
  DeviceParams p = paper_device();
  CHECK_NOTHROW(p.validate());
  p.anharm_mhz[1] = 10.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = paper_device();
  p.freq_ghz[0] = -1.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = paper_device();
  p.set_g_mhz(1, 2, -3.0);
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = paper_device();
  p.levels[2] = 1;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
}

TEST_CASE("every Hamiltonian variant is Hermitian") {
  const DeviceParams p = paper_device(4);
  const HilbertSpace s = p.space();
  CHECK(build_static_hamiltonian(p, s, CouplingForm::ExcitationConserving, 6.6).hermitian());
  CHECK(build_static_hamiltonian(p, s, CouplingForm::Full).hermitian());
  CHECK(build_lab_hamiltonian(p, s).hermitian());
  const PulseSpec pulse{90.0, 200.0, 10.0, 6.62, 0.4, 0.5};
  const auto rot = build_rotating_hamiltonian(p, s, pulse);
  const auto lab = build_full_lab_hamiltonian(p, s, pulse);
  for (double t : {0.0, 3.3, 17.0, 100.0, 190.5, 200.0}) {
    CHECK(is_hermitian(rot.at(t)));
    CHECK(is_hermitian(lab.at(t)));
  }
  const CWDriveSpec cw{5.729, {40.0, 25.0, 10.0}, {0.1, -0.7, 2.0}};
  CHECK(build_cw_hamiltonian(p, s, cw).hermitian());
}

TEST_CASE("drive phase pi flips the sign of the drive term") {
  const DeviceParams p = paper_device(3);
  const HilbertSpace s = p.space();
  PulseSpec a{90.0, 200.0, 10.0, 6.62, 0.0, 0.0};
  PulseSpec b = a;
  b.phase = std::numbers::pi;
  const auto ha = build_rotating_hamiltonian(p, s, a);
  const auto hb = build_rotating_hamiltonian(p, s, b);
  const Matrix h0 = build_rotating_hamiltonian(p, s, PulseSpec{0.0, 200.0, 10.0, 6.62, 0.0, 0.0}).at(50.0);
  CHECK(max_abs((ha.at(50.0) - h0) + (hb.at(50.0) - h0)) < 1e-12);
  CHECK(max_abs(ha.at(50.0) - h0) > 0.1);
}

TEST_CASE("undriven uncoupled lab Hamiltonian is diagonal and static") {
  DeviceParams p = paper_device(3);
  for (auto& c : p.couplings) c.g_mhz = 0.0;
  const auto h = build_full_lab_hamiltonian(p, p.space(), PulseSpec{0.0, 100.0, 10.0, 6.6, 0.0, 0.0});
  const Matrix m = h.at(37.0);
  CHECK(max_abs(m - Matrix(m.diagonal().asDiagonal())) == 0.0);
  CHECK(max_abs(m - h.at(81.0)) == 0.0);
}

TEST_CASE("rotating frame removes the carrier from the diagonal") {
  const DeviceParams p = paper_device(3);
  const HilbertSpace s = p.space();
  const double fd = 6.62;
  const Matrix lab = build_static_hamiltonian(p, s, CouplingForm::ExcitationConserving).matrix;
  const Matrix rot = build_static_hamiltonian(p, s, CouplingForm::ExcitationConserving, fd).matrix;
  Matrix n_total = Matrix::Zero(s.size(), s.size());
  for (int q = 0; q < 3; ++q) n_total += number(s, q).matrix;
  CHECK(max_abs(lab - angular_from_ghz(fd) * n_total - rot) < 1e-10);
}

TEST_CASE("ZZ vanishes without coupling and for additive energies") {
  DeviceParams p = paper_device();
  for (auto& c : p.couplings) c.g_mhz = 0.0;
  const auto zz = static_zz(p);
  for (Pair pair : kAllPairs) CHECK(std::abs(zz.at(pair)) < 1e-9);
  auto additive = [](const std::vector<int>& n) { return 1.3 * n[0] - 0.4 * n[1] + 2.2 * n[2]; };
  CHECK(std::abs(zz_combination(additive, 3, 0, 1)) < 1e-12);
  CHECK(std::abs(zz_combination(additive, 3, 0, 2)) < 1e-12);
}

TEST_CASE("ZZ of a single coupled pair does not depend on the spectator truncation") {
  DeviceParams p = paper_device();
  const double xi5 = static_zz(p).at(Pair::AB);
  p.levels = {5, 5, 3};
  CHECK(static_zz(p).at(Pair::AB) == doctest::Approx(xi5).epsilon(5e-3));
}

TEST_CASE("perturbative NN ZZ at weak coupling agrees with diagonalization") {
  DeviceParams p = paper_device();
  p.set_g_mhz(0, 1, 1.0);
  p.set_g_mhz(1, 2, 1.0);
  p.set_g_mhz(0, 2, 0.0);
  const auto zz = static_zz(p);
  CHECK(perturbative_zz_nn(p, Pair::AB) == doctest::Approx(zz.at(Pair::AB)).epsilon(0.01));
  CHECK(perturbative_zz_nn(p, Pair::BC) == doctest::Approx(zz.at(Pair::BC)).epsilon(0.01));
  // quadratic in g
  DeviceParams q = p;
  q.set_g_mhz(0, 1, 2.0);
  CHECK(perturbative_zz_nn(q, Pair::AB) == doctest::Approx(4.0 * perturbative_zz_nn(p, Pair::AB)));
  CHECK_THROWS_AS(perturbative_zz_nn(p, Pair::AC), ArgumentError);
}

TEST_CASE("perturbative NN ZZ names the vanishing denominator") {
  DeviceParams p = paper_device();
  // Delta_AB + alpha_A = 0
  p.freq_ghz[0] = p.freq_ghz[1] - p.anharm_mhz[0] * 1e-3;
  try {
    perturbative_zz_nn(p, Pair::AB);
    FAIL("expected SingularityError");
  } catch (const SingularityError& e) {
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }
}

TEST_CASE("dressed labels are injective and near the bare states") {
  const auto basis = undriven_dressed_basis(paper_device());
  std::set<std::vector<int>> labels;
  for (const auto& s : basis.states) labels.insert(s.label);
  CHECK(labels.size() == basis.states.size());
  const Matrix c = basis.computational_vectors();
  CHECK(max_abs(c.adjoint() * c - Matrix::Identity(8, 8)) < 1e-10);
  for (int k = 0; k < 8; ++k) {
    const std::vector<int> lab{(k >> 2) & 1, (k >> 1) & 1, k & 1};
    CHECK(basis.find(std::span<const int>(lab)).overlap > 0.9);
  }
}

TEST_CASE("modulated ZZ with zero CW amplitude reproduces the static value") {
  const DeviceParams p = paper_pair_device(5);
  const CWDriveSpec cw{5.729, {0.0, 0.0}, {0.0, 0.0}};
  CHECK(modulated_zz(p, cw).at(Pair::AB) == doctest::Approx(static_zz(p).at(Pair::AB)).epsilon(1e-6));
}

TEST_CASE("weak CW drive: numeric and perturbative modulated ZZ agree") {
  const DeviceParams p = paper_pair_device(6);
  const CWDriveSpec cw{5.729, {8.0, 8.0}, {0.0, 0.0}};
  const double numeric = modulated_zz(p, cw).at(Pair::AB);
  const double analytic = modulated_zz_analytic(p, cw);
  const double xi0 = static_zz(p).at(Pair::AB);
  // the drive-induced shift agrees to leading order
  CHECK((analytic - xi0) == doctest::Approx(numeric - xi0).epsilon(0.15));
}

TEST_CASE("CW Hamiltonian requires an entry per qubit") {
  const DeviceParams p = paper_device(3);
  const CWDriveSpec cw{5.729, {40.0, 40.0}, {0.0, 0.0}};
  CHECK_THROWS_AS(build_cw_hamiltonian(p, p.space(), cw), ArgumentError);
}
