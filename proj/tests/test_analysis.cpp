#include <cmath>

#include "doctest.h"
#include "transim/analysis.hpp"

using namespace transim;

TEST_CASE("oscillation fit recovers a synthetic Rabi trace") {
  std::vector<double> t, y;
  const double nu = 1.25e-3;  // GHz
  for (int k = 0; k < 400; ++k) {
    t.push_back(4.0 * k);
    y.push_back(0.48 - 0.47 * std::cos(kTwoPi * nu * t.back() + 0.3));
  }
  const auto fit = extract_oscillation_frequency(t, y);
  CHECK(fit.nu_mhz == doctest::Approx(1.25).epsilon(1e-6));
  CHECK(std::abs(fit.amplitude) == doctest::Approx(0.47).epsilon(1e-6));
  CHECK(fit.offset == doctest::Approx(0.48).epsilon(1e-6));
  CHECK(fit.residual_rms < 1e-8);
}

TEST_CASE("oscillation fit rejects a flat trace and mismatched input") {
  std::vector<double> t, y;
  for (int k = 0; k < 100; ++k) {
    t.push_back(k);
    y.push_back(0.25);
  }
  CHECK_THROWS_AS(extract_oscillation_frequency(t, y), SearchError);
  y.pop_back();
  CHECK_THROWS_AS(extract_oscillation_frequency(t, y), ArgumentError);
}

TEST_CASE("perturbative exchange rate is linear in the drive and in each coupling") {
  DeviceParams p = paper_device();
  const double nu = perturbative_nu(p, 90.0);
  CHECK(nu > 0.0);
  CHECK(perturbative_nu(p, 45.0) == doctest::Approx(nu / 2.0));
  p.set_g_mhz(0, 1, 80.0);
  CHECK(perturbative_nu(p, 90.0) == doctest::Approx(2.0 * nu));
  p = paper_device();
  p.set_g_mhz(1, 2, 15.5);
  CHECK(perturbative_nu(p, 90.0) == doctest::Approx(nu / 2.0));
  p = paper_device();
  p.freq_ghz[2] = p.freq_ghz[0];
  CHECK_THROWS_AS(perturbative_nu(p, 90.0), SingularityError);
}

TEST_CASE("four-wave-mixing rate is the geometric mean of the cross-Kerr terms") {
  const DeviceParams p = paper_device();
  const auto f = fwm_predict(p, 90.0, 6.623);
  CHECK(f.xi_d == doctest::Approx(90.0 / (1e3 * (6.623 - 6.517))));
  CHECK(f.g3_mhz == doctest::Approx(-f.xi_d * std::sqrt(f.chi_ab_mhz * f.chi_bc_mhz)));
  CHECK(f.chi_ab_mhz > 0.0);
  CHECK(f.chi_bc_mhz > 0.0);
  CHECK_THROWS_AS(fwm_predict(p, 90.0, 6.517), SingularityError);
}

TEST_CASE("square-drive Hamiltonian is constant over the pulse") {
  const DeviceParams p = paper_device(3);
  const auto h = square_drive_hamiltonian(p, p.space(), 50.0, 6.62, 100.0);
  CHECK(h.constant_intervals.size() == 1);
  const Matrix a = h.at(10.0);
  CHECK((a - h.at(90.0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(is_hermitian(a));
}

TEST_CASE("on-resonance chevron slice oscillates at the perturbative rate") {
  const DeviceParams p = paper_device();
  const double amp = 40.0;
  const auto tr = find_transition_frequency(p, amp);
  CHECK(tr.peak_transfer > 0.8);
  std::vector<double> times;
  for (int k = 0; k < 160; ++k) times.push_back(25.0 * k);
  const auto map = rabi_2d_scan(p, amp, {tr.f_s_ghz}, times);
  std::vector<double> trace(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) trace[k] = map.population(0, static_cast<Eigen::Index>(k));
  const auto fit = extract_oscillation_frequency(times, trace);
  CHECK(fit.nu_mhz == doctest::Approx(perturbative_nu(p, amp)).epsilon(0.1));
}

TEST_CASE("transition search at strong coupling lands on the same resonance") {
  // Near the anticrossing the Stark continuation oscillates; the scan must still find it.
  DeviceParams p = paper_device();
  p.set_g_mhz(0, 1, 60.0);
  p.set_g_mhz(1, 2, 60.0);
  TransitionOptions o;
  o.coarse_points = 9;
  const auto tr = find_transition_frequency(p, 100.0, o);
  CHECK(tr.peak_transfer > 0.5);
  CHECK(tr.f_s_ghz == doctest::Approx(find_transition_frequency(paper_device(), 100.0, o).f_s_ghz).epsilon(1e-3));
}

TEST_CASE("broadband traces record failures per point instead of throwing") {
  const DeviceParams p = paper_device(3);
  BroadbandOptions o;
  o.duration_ns = 400.0;
  o.samples = 128;
  const auto pts = broadband_spectrum(p, 50.0, {6.0, 6.62}, o);
  REQUIRE(pts.size() == 2);
  for (const auto& pt : pts) CHECK((pt.ok || !pt.message.empty()));
}

TEST_CASE("two-qubit Stark search finds a sign change of the numeric ZZ") {
  const DeviceParams p = paper_pair_device(5);
  const CWDriveSpec cw{5.729, {40.0, 40.0}, {0.0, 0.0}};
  StarkSearchOptions o;
  o.scan_points = 12;
  const auto r = stark_cancellation_search(p, cw, o);
  CHECK(std::abs(r.zz.at(Pair::AB)) < 1e-3 * std::abs(r.zz_static.at(Pair::AB)));
  CHECK(r.coordinate > o.amp_lo_mhz);
  CHECK(r.coordinate < o.amp_hi_mhz);
}
