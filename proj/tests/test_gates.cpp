#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "transim/gates.hpp"

using namespace transim;
using testing_util::max_abs;

namespace {

GateMatrix random_gate(std::mt19937_64& rng) { return testing_util::haar_unitary(8, rng); }

int bit(int k, int q) { return (k >> (2 - q)) & 1; }

/// Conditional exchanges on three qubits: when the control bit equals `value`, the
/// two target bits either swap (01 <-> 10) or flip together when equal (00 <-> 11).
struct ControlledExchange {
  int control, value, a, b;
  bool equal_pair;
  int apply(int k) const {
    if (bit(k, control) != value) return k;
    if ((bit(k, a) == bit(k, b)) != equal_pair) return k;
    return k ^ (1 << (2 - a)) ^ (1 << (2 - b));
  }
};

std::vector<ControlledExchange> all_exchanges() {
  std::vector<ControlledExchange> out;
  for (int c = 0; c < 3; ++c)
    for (int v = 0; v < 2; ++v)
      for (bool eq : {false, true}) {
        const int a = c == 0 ? 1 : 0;
        const int b = c == 2 ? 1 : 2;
        out.push_back({c, v, a, b, eq});
      }
  return out;
}

}  // namespace

TEST_CASE("fidelity identities") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const GateMatrix u = random_gate(rng);
    CHECK(average_gate_fidelity(u, u) == doctest::Approx(1.0).epsilon(1e-12));
    for (double c : {0.3, 0.9}) CHECK(average_gate_fidelity(c * u, u) == doctest::Approx(c * c).epsilon(1e-12));
    CHECK(average_gate_fidelity(std::polar(1.0, 0.7) * u, u) == doctest::Approx(1.0).epsilon(1e-12));
    // unitary case: (d F_pro + 1) / (d + 1) with F_pro = |Tr(U^dag V)|^2 / d^2
    const GateMatrix v = random_gate(rng);
    const double fpro = std::norm((u.adjoint() * v).trace()) / 64.0;
    CHECK(average_gate_fidelity(v, u) == doctest::Approx((8.0 * fpro + 1.0) / 9.0).epsilon(1e-12));
  }
}

TEST_CASE("ideal gate exchanges 001 and 110 with amplitude -i") {
  const GateMatrix g = ideal_gate();
  CHECK(max_abs(g.adjoint() * g - GateMatrix::Identity()) < 1e-15);
  CHECK(g(6, 1) == Complex(0.0, -1.0));
  CHECK(g(1, 6) == Complex(0.0, -1.0));
  for (int k : {0, 2, 3, 4, 5, 7}) CHECK(g(k, k) == Complex(1.0, 0.0));
}

TEST_CASE("phase correction is diagonal and trivial at zero angles") {
  CHECK(max_abs(u_phase(PhaseCorrection{}) - GateMatrix::Identity()) < 1e-15);
  const PhaseCorrection c{0.4, -1.2, 0.3, 2.0, -0.5, 0.0};
  const GateMatrix u = u_phase(c);
  CHECK(max_abs(u - GateMatrix(u.diagonal().asDiagonal())) == 0.0);
  CHECK(max_abs(u.adjoint() * u - GateMatrix::Identity()) < 1e-14);
  // |111> picks up both conditional phases
  const Complex ratio = u(7, 7) / (u(0, 0) * u(4, 4) / u(0, 0) * u(2, 2) / u(0, 0) * u(1, 1) / u(0, 0));
  CHECK(std::arg(ratio) == doctest::Approx(std::remainder(-(0.4 - 1.2), kTwoPi)));
}

TEST_CASE("five-angle search undoes a known phase error") {
  const PhaseCorrection truth{0.8, -0.35, 1.1, -2.3, 0.6, 0.0};
  const GateMatrix raw = u_phase(truth).adjoint() * ideal_gate() * std::polar(1.0, 0.2);
  const auto r = optimize_phase_angles(raw, ideal_gate());
  CHECK(r.fidelity > 1.0 - 1e-9);
}

TEST_CASE("extraction reads the computational block of a propagator") {
  const DressedBasis b = undriven_dressed_basis(paper_device(3));
  const Matrix id = Matrix::Identity(b.space.size(), b.space.size());
  CHECK(max_abs(extract_computational_unitary(id, b) - GateMatrix::Identity()) < 1e-12);
}

TEST_CASE("CNOT truth tables") {
  for (int c = 0; c < 3; ++c)
    for (int t = 0; t < 3; ++t) {
      if (c == t) {
        CHECK_THROWS_AS(cnot(c, t), ArgumentError);
        continue;
      }
      const GateMatrix g = cnot(c, t);
      for (int k = 0; k < 8; ++k) {
        const int out = bit(k, c) ? k ^ (1 << (2 - t)) : k;
        CHECK(g(out, k) == Complex(1.0, 0.0));
      }
    }
}

TEST_CASE("iFredkin layouts match exactly one brute-force controlled exchange") {
  for (const char* name : {"a", "b", "c", "d"}) {
    const FredkinLayout layout = fredkin_layout_from_string(name);
    const GateMatrix g = compose_ifredkin(ideal_gate(), layout);
    CHECK(max_abs(g.adjoint() * g - GateMatrix::Identity()) < 1e-14);
    int matches = 0;
    for (const auto& cs : all_exchanges()) {
      bool ok = true;
      for (int k = 0; k < 8 && ok; ++k) ok = std::norm(g(cs.apply(k), k)) > 1.0 - 1e-12;
      if (!ok) continue;
      ++matches;
      // exchanged columns carry -i, the rest +1
      const auto [x, y] = fredkin_exchanged_pair(layout);
      for (int k = 0; k < 8; ++k) {
        const bool moved = cs.apply(k) != k;
        CHECK(moved == (k == x || k == y));
        const Complex expected = moved ? Complex(0.0, -1.0) : Complex(1.0, 0.0);
        CHECK(std::abs(g(cs.apply(k), k) - expected) < 1e-12);
      }
    }
    CHECK(matches == 1);
  }
  // the first three layouts are controlled-SWAPs proper
  for (const char* name : {"a", "b", "c"}) {
    const GateMatrix g = compose_ifredkin(ideal_gate(), fredkin_layout_from_string(name));
    int swaps = 0;
    for (const auto& cs : all_exchanges()) {
      if (cs.equal_pair) continue;
      bool ok = true;
      for (int k = 0; k < 8 && ok; ++k) ok = std::norm(g(cs.apply(k), k)) > 1.0 - 1e-12;
      swaps += ok;
    }
    CHECK(swaps == 1);
  }
  // identity base leaves the product of the two CNOTs
  CHECK(max_abs(compose_ifredkin(GateMatrix::Identity(), FredkinLayout::A) - cnot(0, 1) * cnot(0, 1)) < 1e-15);
  CHECK_THROWS_AS(fredkin_layout_from_string("e"), ArgumentError);
}

TEST_CASE("a short mistimed pulse is far from the target") {
  const DeviceParams p = paper_device(3);
  const GateMatrix g = simulate_gate(p, PulseSpec{90.0, 60.0, 10.0, 6.6229, 0.0, 0.0});
  CHECK(max_abs(g.adjoint() * g - GateMatrix::Identity()) < 5e-2);
  CHECK(average_gate_fidelity(g, ideal_gate()) < 0.9);
}
