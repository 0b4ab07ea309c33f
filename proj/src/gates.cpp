#include "transim/gates.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <numbers>
#include <sstream>

#include "transim/optimize.hpp"
#include "transim/parallel.hpp"

namespace transim {

namespace {

int bit(int k, int q) { return (k >> (2 - q)) & 1; }
int excitations(int k) { return bit(k, 0) + bit(k, 1) + bit(k, 2); }

double wrap_2pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

Eigen::Matrix<Complex, 8, 1> phase_diagonal(double t_ab, double t_bc, double pa, double pb, double pc) {
  Eigen::Matrix<Complex, 8, 1> d;
  for (int k = 0; k < 8; ++k) {
    const double single = pa * (bit(k, 0) - 0.5) + pb * (bit(k, 1) - 0.5) + pc * (bit(k, 2) - 0.5);
    const double cphase = -t_ab * bit(k, 0) * bit(k, 1) - t_bc * bit(k, 1) * bit(k, 2);
    d(k) = std::polar(1.0, single + cphase);
  }
  return d;
}

}  // namespace

PhaseCorrection PhaseCorrection::wrapped() const {
  return {wrap_2pi(theta_ab), wrap_2pi(theta_bc), wrap_2pi(phi_a), wrap_2pi(phi_b), wrap_2pi(phi_c),
          wrap_2pi(phi_drive)};
}

GateMatrix extract_computational_unitary(const Matrix& prop, const DressedBasis& basis) {
  if (prop.rows() != basis.space.size() || prop.cols() != basis.space.size())
    throw ArgumentError("extract_computational_unitary: propagator does not match the dressed space");
  const Matrix v = basis.computational_vectors();
  if (v.cols() != 8) throw ArgumentError("extract_computational_unitary: needs three qubits");
  return v.adjoint() * prop * v;
}

GateMatrix u_phase(const PhaseCorrection& c) {
  return phase_diagonal(c.theta_ab, c.theta_bc, c.phi_a, c.phi_b, c.phi_c).asDiagonal();
}

GateMatrix ideal_gate() {
  GateMatrix u = GateMatrix::Identity();
  u(1, 1) = u(6, 6) = 0.0;
  u(1, 6) = u(6, 1) = Complex(0.0, -1.0);
  return u;
}

double average_gate_fidelity(const GateMatrix& u, const GateMatrix& ideal) {
  const double overlap = std::norm((ideal.adjoint() * u).trace());
  const double norm = (u.adjoint() * u).trace().real();
  return (overlap + norm) / 72.0;
}

PhaseOptimization optimize_phase_angles(const GateMatrix& raw, const GateMatrix& ideal,
                                        const PhaseSearchOptions& options) {
  // Tr(ideal^dag D raw) = sum_k D_k (raw ideal^dag)_kk.
  const Eigen::Matrix<Complex, 8, 1> m = (raw * ideal.adjoint()).diagonal();
  const double norm = (raw.adjoint() * raw).trace().real();
  auto fidelity = [&](const std::vector<double>& x) {
    const auto d = phase_diagonal(x[0], x[1], x[2], x[3], x[4]);
    return (std::norm(d.cwiseProduct(m).sum()) + norm) / 72.0;
  };
  // Seeds in which D_k m_k is real for |000>, the single excitations and the AB, BC pairs.
  const double a000 = std::arg(m(0));
  const double pa = a000 - std::arg(m(4));
  const double pb = a000 - std::arg(m(2));
  const double pc = a000 - std::arg(m(1));
  const double t_ab = std::arg(m(6)) + a000 - std::arg(m(4)) - std::arg(m(2));
  const double t_bc = std::arg(m(3)) + a000 - std::arg(m(2)) - std::arg(m(1));
  std::vector<std::vector<double>> starts{{t_ab, t_bc, pa, pb, pc}};
  if (options.theta_seed) starts.push_back({options.theta_seed->first, options.theta_seed->second, pa, pb, pc});

  NelderMeadOptions nm;
  nm.initial_step = 0.3;
  nm.x_tolerance = 1e-10;
  nm.f_tolerance = 1e-15;
  nm.max_evaluations = 6000;
  const Objective f = [&](const std::vector<double>& x) { return -fidelity(x); };
  MinimizeResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < starts.size(); ++s) {
    auto r = nelder_mead_restarts(f, starts[s], options.restarts, std::numbers::pi, options.seed + s, nm);
    if (r.value < best.value) best = std::move(r);
  }
  PhaseOptimization out;
  const auto& x = best.x;
  out.correction = PhaseCorrection{x[0], x[1], x[2], x[3], x[4], 0.0}.wrapped();
  out.fidelity = -best.value;
  out.raw = raw;
  out.corrected = u_phase(out.correction) * raw;
  return out;
}

PhaseOptimization optimize_phase_correction(const std::function<GateMatrix(double)>& raw, const GateMatrix& ideal,
                                            const PhaseSearchOptions& options) {
  int sims = 0;
  auto inner = [&](double phi) {
    ++sims;
    auto r = optimize_phase_angles(raw(phi), ideal, options);
    r.correction.phi_drive = wrap_2pi(phi);
    return r;
  };
  PhaseOptimization best;
  if (!options.optimize_drive_phase) {
    best = inner(options.drive_phase_center);
  } else {
    const bool full = options.drive_phase_half_width <= 0.0;
    const double lo = full ? options.drive_phase_center - std::numbers::pi
                           : options.drive_phase_center - options.drive_phase_half_width;
    const double width = full ? kTwoPi : 2.0 * options.drive_phase_half_width;
    const int n = std::max(3, options.drive_phase_grid);
    std::vector<double> grid(n);
    for (int k = 0; k < n; ++k) grid[k] = full ? lo + width * k / n : lo + width * k / (n - 1);
    best.fidelity = -1.0;
    double best_phi = grid[0];
    for (double phi : grid) {
      auto r = inner(phi);
      if (r.fidelity > best.fidelity) {
        best = std::move(r);
        best_phi = phi;
      }
    }
    const double h = full ? width / n : width / (n - 1);
    double a = best_phi - h;
    double b = best_phi + h;
    if (!full) {
      a = std::max(a, lo);
      b = std::min(b, lo + width);
    }
    const auto g = golden_maximize([&](double phi) { return inner(phi).fidelity; }, a, b,
                                   options.drive_phase_tolerance, 80);
    auto r = inner(g.x);
    if (r.fidelity > best.fidelity) best = std::move(r);
  }
  best.simulations = sims;
  if (best.fidelity < 0.5) {
    std::ostringstream msg;
    msg << "best fidelity " << best.fidelity << " below 0.5; the pulse, not the phases, is wrong";
    throw CalibrationError("phase correction", msg.str());
  }
  return best;
}

DressedBasis frame_dressed_basis(const DeviceParams& params, Frame frame) {
  return undriven_dressed_basis(params, frame == Frame::Lab ? CouplingForm::Full : CouplingForm::ExcitationConserving);
}

namespace {

TimeDependentHamiltonian frame_hamiltonian(const DeviceParams& params, const PulseSpec& pulse, Frame frame) {
  return frame == Frame::Lab ? build_full_lab_hamiltonian(params, params.space(), pulse)
                             : build_rotating_hamiltonian(params, params.space(), pulse);
}

}  // namespace

GateMatrix simulate_gate(const DeviceParams& params, const PulseSpec& pulse, Frame frame,
                         const IntegratorOptions& integrator) {
  if (params.qubits() != 3) throw ArgumentError("simulate_gate: needs three qubits");
  const DressedBasis basis = frame_dressed_basis(params, frame);
  const Matrix v = basis.computational_vectors();
  const Matrix out = propagator(frame_hamiltonian(params, pulse, frame), pulse.duration_ns, integrator, v);
  GateMatrix g = v.adjoint() * out;
  if (frame == Frame::Lab) {
    const double w = angular_from_ghz(pulse.carrier_ghz) * pulse.duration_ns;
    for (int k = 0; k < 8; ++k) g.row(k) *= std::polar(1.0, w * excitations(k));
  }
  return g;
}

double simulate_transfer(const DeviceParams& params, const PulseSpec& pulse, Frame frame,
                         const IntegratorOptions& integrator) {
  const DressedBasis basis = frame_dressed_basis(params, frame);
  const Vector psi0 = basis.find({0, 0, 1}).vector;
  const Matrix out = propagator(frame_hamiltonian(params, pulse, frame), pulse.duration_ns, integrator, psi0);
  return std::norm(basis.find({1, 1, 0}).vector.dot(out.col(0)));
}

PulseSpec CalibrationResult::pulse(double amp_mhz, double sigma_ns) const {
  return PulseSpec{amp_mhz, duration_ns, sigma_ns, f_d_ghz, correction.phi_drive, drag};
}

CalibrationResult calibrate_gate(const DeviceParams& params, double amp_mhz, const CalibrationOptions& options) {
  if (!(amp_mhz > 0.0)) throw ArgumentError("calibrate_gate: amplitude must be positive");
  CalibrationResult out;
  const double sigma = options.sigma_ns;
  auto transfer = [&](double fd, double tau, double drag) {
    return simulate_transfer(params, PulseSpec{amp_mhz, tau, sigma, fd, 0.0, drag}, options.frame, options.integrator);
  };

  try {
    out.transition = find_transition_frequency(params, amp_mhz, options.transition);
  } catch (const NumericalError& e) {
    throw CalibrationError("transition frequency", e.what());
  }
  out.f_s_ghz = out.transition.f_s_ghz;

  double tau = 0.0;
  try {
    const double half = out.transition.half_period_ns;
    const double step = half / 20.0;  // 1 / (40 nu)
    const int k_half = std::max(2, options.duration_scan_half_points);
    double center = half + 2.0 * sigma;
    const double tau_min = 4.0 * sigma + 1e-6;
    bool found = false;
    for (int attempt = 0; attempt < 4 && !found; ++attempt) {
      std::vector<double> taus;
      for (int k = -k_half; k <= k_half; ++k)
        if (center + k * step >= tau_min) taus.push_back(center + k * step);
      if (taus.size() < 3) throw SearchError("duration window collapsed below the edge length");
      const auto vals = parallel_map<double>(
          taus.size(), [&](std::size_t k) { return transfer(out.f_s_ghz, taus[k], options.drag); },
          options.transition.workers);
      out.simulations += static_cast<int>(taus.size());
      for (std::size_t k = 0; k < taus.size(); ++k) out.duration_scan.emplace_back(taus[k], vals[k]);
      const auto best = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
      if (best == 0 && taus.front() > tau_min + step) {
        center -= k_half * step;
      } else if (best + 1 == taus.size()) {
        center += k_half * step;
      } else {
        tau = best == 0 ? taus[0]
                        : parabolic_vertex(taus[best - 1], vals[best - 1], taus[best], vals[best], taus[best + 1],
                                           vals[best + 1]);
        found = true;
      }
    }
    if (!found) throw SearchError("no interior transfer maximum in the duration scan");
    std::sort(out.duration_scan.begin(), out.duration_scan.end());
  } catch (const NumericalError& e) {
    throw CalibrationError("gate duration", e.what());
  }

  try {
    const double f0 = out.f_s_ghz;
    const double t0 = tau;
    const double l0 = options.drag;
    auto unpack = [&](const std::vector<double>& x) {
      return std::array<double, 3>{f0 + 1e-4 * x[0], t0 + 2.0 * x[1], options.refine_drag ? l0 + 0.1 * x[2] : l0};
    };
    const Objective f = [&](const std::vector<double>& x) {
      const auto p = unpack(x);
      if (p[1] < 4.0 * sigma) return 1.0;
      ++out.simulations;
      return -transfer(p[0], p[1], p[2]);
    };
    NelderMeadOptions nm;
    nm.initial_step = 0.5;
    nm.x_tolerance = 1e-4;
    nm.f_tolerance = 1e-10;
    nm.max_evaluations = options.refine_evaluations;
    const auto r = nelder_mead(f, std::vector<double>(options.refine_drag ? 3 : 2, 0.0), nm);
    const auto p = unpack(r.x);
    out.f_d_ghz = p[0];
    out.duration_ns = p[1];
    out.drag = p[2];
    out.transfer = -r.value;
    if (out.transfer < 0.5) throw SearchError("refined transfer below 0.5");
  } catch (const NumericalError& e) {
    throw CalibrationError("pulse refinement", e.what());
  }

  PhaseSearchOptions phase = options.phase;
  if (!phase.theta_seed) {
    const auto zz = static_zz(params);
    phase.theta_seed = std::pair{angular_from_mhz(zz.at(Pair::AB)) * out.duration_ns,
                                 angular_from_mhz(zz.at(Pair::BC)) * out.duration_ns};
  }
  PhaseOptimization best;
  try {
    best = optimize_phase_correction(
        [&](double phi) {
          ++out.simulations;
          return simulate_gate(params, PulseSpec{amp_mhz, out.duration_ns, sigma, out.f_d_ghz, phi, out.drag},
                               options.frame, options.integrator);
        },
        ideal_gate(), phase);
  } catch (const CalibrationError&) {
    throw;
  } catch (const NumericalError& e) {
    throw CalibrationError("phase correction", e.what());
  }
  out.correction = best.correction;
  out.fidelity = std::clamp(best.fidelity, 0.0, 1.0);
  out.raw = best.raw;
  out.gate = best.corrected;
  return out;
}

FrameComparison compare_frames(const DeviceParams& params, double amp_mhz, const CalibrationResult& rotating,
                               double sigma_ns, const FrameComparisonOptions& options) {
  FrameComparison out;
  auto gap = [&](CouplingForm form) {
    const DressedBasis b = undriven_dressed_basis(params, form);
    return (b.find({1, 1, 0}).energy - b.find({0, 0, 1}).energy) / kTwoPi;
  };
  out.static_shift_ghz = gap(CouplingForm::Full) - gap(CouplingForm::ExcitationConserving);
  out.f_d_lab_ghz = rotating.f_d_ghz;
  out.duration_lab_ns = rotating.duration_ns;
  const PulseSpec base = rotating.pulse(amp_mhz, sigma_ns);

  if (options.retune) {
    // carrier first (transfer is most sensitive to detuning), then a parabola in tau
    auto transfer = [&](double f, double tau) {
      PulseSpec q = base;
      q.carrier_ghz = f;
      q.duration_ns = tau;
      ++out.simulations;
      return simulate_transfer(params, q, Frame::Lab, options.lab_integrator);
    };
    const double f0 = rotating.f_d_ghz + out.static_shift_ghz;
    const double w = options.retune_window_ghz;
    const auto g = golden_maximize([&](double f) { return transfer(f, rotating.duration_ns); }, f0 - w, f0 + w,
                                   options.retune_tolerance_ghz, 40);
    out.f_d_lab_ghz = g.x;
    const double h = options.retune_duration_step_ns;
    const double t0 = rotating.duration_ns;
    const double lo = transfer(g.x, t0 - h);
    const double hi = transfer(g.x, t0 + h);
    double tau = parabolic_vertex(t0 - h, lo, t0, g.value, t0 + h, hi);
    tau = std::clamp(tau, t0 - h, t0 + h);
    double best = g.value;
    out.duration_lab_ns = t0;
    if (lo > best) best = lo, out.duration_lab_ns = t0 - h;
    if (hi > best) best = hi, out.duration_lab_ns = t0 + h;
    if (tau != t0 - h && tau != t0 && tau != t0 + h) {
      const double at = transfer(g.x, tau);
      if (at > best) best = at, out.duration_lab_ns = tau;
    }
    out.transfer_lab = best;
  }

  PulseSpec lab = base;
  lab.carrier_ghz = out.f_d_lab_ghz;
  lab.duration_ns = out.duration_lab_ns;
  PhaseSearchOptions ph;
  ph.drive_phase_center = rotating.correction.phi_drive;
  ph.drive_phase_half_width = options.drive_phase_half_width;
  ph.drive_phase_grid = options.drive_phase_grid;
  ph.drive_phase_tolerance = 2e-2;
  ph.theta_seed = std::pair{rotating.correction.theta_ab, rotating.correction.theta_bc};
  bool have_center = false;
  out.lab = optimize_phase_correction(
      [&](double phi) {
        PulseSpec q = lab;
        q.phase = phi;
        ++out.simulations;
        GateMatrix g = simulate_gate(params, q, Frame::Lab, options.lab_integrator);
        if (!have_center && std::abs(phi - rotating.correction.phi_drive) < 1e-12) {
          out.raw_lab = g;
          have_center = true;
        }
        return g;
      },
      ideal_gate(), ph);
  if (!have_center) {
    PulseSpec q = lab;
    q.phase = rotating.correction.phi_drive;
    ++out.simulations;
    out.raw_lab = simulate_gate(params, q, Frame::Lab, options.lab_integrator);
  }
  if (!options.retune) out.transfer_lab = std::norm(out.raw_lab(6, 1));
  out.max_population_difference = (out.raw_lab.cwiseAbs2() - rotating.raw.cwiseAbs2()).cwiseAbs().maxCoeff();
  out.fidelity_difference = std::abs(out.lab.fidelity - rotating.fidelity);
  return out;
}

GateMatrix cnot(int control, int target) {
  if (control < 0 || control > 2 || target < 0 || target > 2 || control == target)
    throw ArgumentError("cnot: control and target must be distinct qubits 0..2");
  GateMatrix u = GateMatrix::Zero();
  for (int k = 0; k < 8; ++k) {
    const int out = bit(k, control) ? k ^ (1 << (2 - target)) : k;
    u(out, k) = 1.0;
  }
  return u;
}

FredkinLayout fredkin_layout_from_string(const std::string& name) {
  if (name == "a" || name == "A") return FredkinLayout::A;
  if (name == "b" || name == "B") return FredkinLayout::B;
  if (name == "c" || name == "C") return FredkinLayout::C;
  if (name == "d" || name == "D") return FredkinLayout::D;
  throw ArgumentError("unknown iFredkin layout '" + name + "' (expected a, b, c or d)");
}

const char* fredkin_layout_name(FredkinLayout layout) {
  switch (layout) {
    case FredkinLayout::A: return "a";
    case FredkinLayout::B: return "b";
    case FredkinLayout::C: return "c";
    case FredkinLayout::D: return "d";
  }
  return "?";
}

GateMatrix compose_ifredkin(const GateMatrix& base, FredkinLayout layout) {
  GateMatrix w;
  switch (layout) {
    case FredkinLayout::A: w = cnot(0, 1); break;
    case FredkinLayout::B: w = cnot(1, 0); break;
    case FredkinLayout::C: w = cnot(2, 1); break;
    case FredkinLayout::D: w = cnot(1, 2); break;
    default: throw ArgumentError("compose_ifredkin: unknown layout");
  }
  return w * base * w;
}

std::pair<int, int> fredkin_exchanged_pair(FredkinLayout layout) {
  switch (layout) {
    case FredkinLayout::A: return {0b001, 0b100};
    case FredkinLayout::B: return {0b001, 0b010};
    case FredkinLayout::C: return {0b011, 0b110};
    case FredkinLayout::D: return {0b001, 0b111};
  }
  throw ArgumentError("fredkin_exchanged_pair: unknown layout");
}

}  // namespace transim
