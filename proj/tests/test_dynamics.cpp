#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "transim/dynamics.hpp"
#include "transim/model.hpp"

using namespace transim;
using testing_util::max_abs;

namespace {

TimeDependentHamiltonian short_gate(int levels) {
  const DeviceParams p = paper_device(levels);
  return build_rotating_hamiltonian(p, p.space(), PulseSpec{90.0, 80.0, 10.0, 6.6229, 0.4, 0.3});
}

/// H'(t) = -H(T - t): its propagator from 0 to T is the inverse of the forward one.
TimeDependentHamiltonian time_reversed(const TimeDependentHamiltonian& h, double T) {
  TimeDependentHamiltonian r{Operator(h.space(), -h.static_part.matrix), {}, {}};
  for (const auto& d : h.drives) {
    auto env = d.envelope;
    r.drives.push_back({d.op, [env, T](double t) { return -env(T - t); }});
  }
  for (const auto& [a, b] : h.constant_intervals) r.constant_intervals.emplace_back(T - b, T - a);
  return r;
}

double min_eigenvalue(const Matrix& rho) { return eig_hermitian(Matrix((rho + rho.adjoint()) / 2.0)).values(0); }

}  // namespace

TEST_CASE("propagator is unitary") {
  for (int levels : {3, 5}) {
    const auto h = short_gate(levels);
    const Matrix u = propagator(h, 80.0);
    CHECK(max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())) < 1e-8);
  }
}

TEST_CASE("exact plateau segments agree with plain Runge-Kutta") {
  const auto h = short_gate(3);
  IntegratorOptions rk;
  rk.exact_constant_intervals = false;
  const Matrix a = propagator(h, 80.0);
  const Matrix b = propagator(h, 80.0, rk);
  CHECK(max_abs(a - b) < 1e-7);
}

TEST_CASE("static Hamiltonian evolution equals the matrix exponential") {
  const DeviceParams p = paper_device(3);
  const Operator h0 = build_static_hamiltonian(p, p.space(), CouplingForm::ExcitationConserving, 6.5);
  TimeDependentHamiltonian h{h0, {}, {}};
  IntegratorOptions o;
  o.exact_constant_intervals = false;
  const Matrix u = propagator(h, 3.0, o);
  CHECK(max_abs(u - unitary_exponential(eig_hermitian(h0), 3.0)) < 1e-8);
}

TEST_CASE("forward then time-reversed evolution returns the initial state") {
  const auto h = short_gate(4);
  const auto r = time_reversed(h, 80.0);
  const int n = h.space().size();
  Matrix psi = Matrix::Zero(n, 2);
  psi(1, 0) = 1.0;
  psi(3, 1) = std::sqrt(0.5);
  psi(20, 1) = Complex(0.0, std::sqrt(0.5));
  const Matrix fwd = propagator(h, 80.0, {}, psi);
  const Matrix back = propagator(r, 80.0, {}, fwd);
  CHECK(max_abs(back - psi) < 1e-6);
}

TEST_CASE("trajectory samples keep the norm") {
  const auto h = short_gate(3);
  Matrix psi = Matrix::Zero(h.space().size(), 1);
  psi(1, 0) = 1.0;
  std::vector<double> grid;
  for (int k = 0; k <= 16; ++k) grid.push_back(5.0 * k);
  const auto tr = propagate_state(h, psi, grid);
  REQUIRE(tr.states.size() == grid.size());
  for (const auto& s : tr.states) CHECK(std::abs(s.col(0).squaredNorm() - 1.0) < 1e-9);
}

TEST_CASE("single-qubit relaxation and dephasing follow their exponentials") {
  const HilbertSpace s({3});
  TimeDependentHamiltonian h{Operator(s, Matrix::Zero(3, 3)), {}, {}};
  DecoherenceSpec dec{{2.0}, {1.5}};  // us
  Matrix rho = Matrix::Zero(3, 3);
  rho(0, 0) = rho(1, 1) = rho(0, 1) = rho(1, 0) = 0.5;
  const std::vector<double> grid{0.0, 500.0, 1500.0};
  for (bool splitting : {true, false}) {
    IntegratorOptions o;
    o.lindblad_splitting = splitting;
    const auto tr = lindblad_propagate(h, rho, dec, grid, o);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t_us = grid[k] * 1e-3;
      CHECK(tr.states[k](1, 1).real() == doctest::Approx(0.5 * std::exp(-t_us / 2.0)).epsilon(1e-7));
      CHECK(std::abs(tr.states[k](0, 1)) == doctest::Approx(0.5 * std::exp(-t_us / 1.5)).epsilon(1e-7));
      CHECK(std::abs(tr.states[k](2, 2)) < 1e-14);
    }
  }
}

TEST_CASE("Lindblad evolution preserves trace, Hermiticity and positivity") {
  const auto h = short_gate(3);
  const int n = h.space().size();
  Matrix psi = Matrix::Zero(n, 1);
  psi(1, 0) = std::sqrt(0.6);
  psi(12, 0) = Complex(0.0, std::sqrt(0.4));
  const Matrix rho0 = psi * psi.adjoint();
  const auto dec = DecoherenceSpec::uniform(3, 5.0, 3.0);  // strong, to make the check meaningful
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(10.0 * k);
  for (bool splitting : {true, false}) {
    IntegratorOptions o;
    o.lindblad_splitting = splitting;
    const auto tr = lindblad_propagate(h, rho0, dec, grid, o);
    for (const auto& rho : tr.states) {
      CHECK(std::abs(rho.trace() - 1.0) < 1e-8);
      CHECK(max_abs(rho - rho.adjoint()) < 1e-10);
      CHECK(min_eigenvalue(rho) > -1e-8);
    }
  }
}

TEST_CASE("splitting and direct master-equation integration agree") {
  const auto h = short_gate(3);
  const int n = h.space().size();
  Matrix rho0 = Matrix::Zero(n, n);
  rho0(1, 1) = 1.0;
  const auto dec = DecoherenceSpec::uniform(3, 20.0, 10.0);
  IntegratorOptions direct;
  direct.lindblad_splitting = false;
  IntegratorOptions split;
  split.lindblad_step_ns = 0.25;
  const auto a = lindblad_propagate(h, rho0, dec, {0.0, 80.0}, split);
  const auto b = lindblad_propagate(h, rho0, dec, {0.0, 80.0}, direct);
  CHECK(max_abs(a.states.back() - b.states.back()) < 1e-5);
}

TEST_CASE("without decoherence the master equation is the unitary channel") {
  const auto h = short_gate(3);
  const int n = h.space().size();
  Matrix rho0 = Matrix::Zero(n, n);
  rho0(1, 1) = 1.0;
  const Matrix u = propagator(h, 80.0);
  const auto tr = lindblad_propagate(h, rho0, DecoherenceSpec::none(3), {0.0, 80.0});
  CHECK(max_abs(tr.states.back() - u * rho0 * u.adjoint()) < 1e-7);
}

TEST_CASE("batched master equation matches single runs") {
  const auto h = short_gate(3);
  const int n = h.space().size();
  std::vector<Matrix> rhos(2, Matrix::Zero(n, n));
  rhos[0](0, 0) = 1.0;
  rhos[1](1, 1) = rhos[1](9, 9) = rhos[1](1, 9) = rhos[1](9, 1) = 0.5;
  const auto dec = DecoherenceSpec::uniform(3, 50.0, 50.0);
  const auto batch = lindblad_propagate_batch(h, rhos, dec, 80.0);
  for (int k = 0; k < 2; ++k) {
    const auto single = lindblad_propagate(h, rhos[k], dec, {0.0, 80.0});
    CHECK(max_abs(batch[k] - single.states.back()) < 1e-8);
  }
}

TEST_CASE("collapse operators act only on the qubit subspace") {
  const HilbertSpace s({4, 3});
  const auto ops = collapse_operators(s, DecoherenceSpec::uniform(2, 100.0, 50.0));
  CHECK(ops.size() == 4);
  for (const auto& l : ops) {
    for (int k = 0; k < s.size(); ++k) {
      const auto lv = s.levels(k);
      if (lv[0] >= 2 && lv[1] >= 2) CHECK(l.matrix.col(k).norm() == 0.0);
    }
  }
  CHECK_THROWS_AS(DecoherenceSpec::uniform(2, 100.0, 250.0).validate(), ArgumentError);
}
