#include "transim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace transim {

std::pair<int, int> qubits_of(Pair p) {
  switch (p) {
    case Pair::AB: return {0, 1};
    case Pair::BC: return {1, 2};
    case Pair::AC: return {0, 2};
  }
  throw ArgumentError("unknown pair");
}

const char* pair_name(Pair p) {
  switch (p) {
    case Pair::AB: return "AB";
    case Pair::BC: return "BC";
    case Pair::AC: return "AC";
  }
  return "?";
}

double DeviceParams::g_mhz(int i, int j) const {
  for (const auto& c : couplings)
    if ((c.i == i && c.j == j) || (c.i == j && c.j == i)) return c.g_mhz;
  return 0.0;
}

void DeviceParams::set_g_mhz(int i, int j, double value) {
  for (auto& c : couplings) {
    if ((c.i == i && c.j == j) || (c.i == j && c.j == i)) {
      c.g_mhz = value;
      return;
    }
  }
  couplings.push_back({i, j, value});
}

void DeviceParams::validate() const {
  const auto n = freq_ghz.size();
  if (n < 1) throw ArgumentError("device: at least one qubit required");
  if (anharm_mhz.size() != n) throw ArgumentError("device.alpha: one value per qubit required");
  if (levels.size() != n) throw ArgumentError("device.levels: one value per qubit required");
  for (std::size_t q = 0; q < n; ++q) {
    if (!(freq_ghz[q] > 0.0)) throw ArgumentError("device.omega: frequencies must be positive");
    if (!(anharm_mhz[q] < 0.0)) throw ArgumentError("device.alpha: anharmonicities must be negative");
    if (levels[q] < 2) throw ArgumentError("device.levels: at least two levels per qubit");
  }
  for (const auto& c : couplings) {
    if (c.i < 0 || c.j < 0 || c.i >= static_cast<int>(n) || c.j >= static_cast<int>(n) || c.i == c.j)
      throw ArgumentError("device.g: coupling references an invalid qubit pair");
    if (!(c.g_mhz >= 0.0)) throw ArgumentError("device.g: couplings must be non-negative");
  }
}

DeviceParams paper_device(int levels) {
  DeviceParams p;
  p.freq_ghz = {5.641, 6.517, 5.507};
  p.anharm_mhz = {-300.0, -381.0, -303.0};
  p.couplings = {{0, 1, 40.0}, {1, 2, 31.0}, {0, 2, 1.9}};
  p.levels = {levels, levels, levels};
  return p;
}

DeviceParams paper_pair_device(int levels) {
  DeviceParams p;
  p.freq_ghz = {5.641, 6.517};
  p.anharm_mhz = {-300.0, -381.0};
  p.couplings = {{0, 1, 40.0}};
  p.levels = {levels, levels};
  return p;
}

Matrix TimeDependentHamiltonian::at(double t) const {
  Matrix h = static_part.matrix;
  for (const auto& d : drives) {
    const Complex e = d.envelope(t);
    h += e * d.op.matrix + std::conj(e) * d.op.matrix.adjoint();
  }
  return h;
}

namespace {

void check_space(const DeviceParams& params, const HilbertSpace& space) {
  params.validate();
  if (space.dims() != params.levels)
    throw ArgumentError("Hilbert space dimensions do not match device truncation levels");
}

// Duffing ladder plus couplings, in rad/ns.
Matrix static_matrix(const DeviceParams& params, const HilbertSpace& space, CouplingForm form, double frame_ghz) {
  const int n = space.size();
  Matrix h = Matrix::Zero(n, n);
  // Diagonal part directly from the level labels.
  for (int k = 0; k < n; ++k) {
    const auto lv = space.levels(k);
    double e = 0.0;
    for (int q = 0; q < params.qubits(); ++q) {
      const double m = lv[q];
      e += angular_from_ghz(params.freq_ghz[q] - frame_ghz) * m + 0.5 * angular_from_mhz(params.anharm_mhz[q]) * m * (m - 1.0);
    }
    h(k, k) = e;
  }
  for (const auto& c : params.couplings) {
    if (c.g_mhz == 0.0) continue;
    const Matrix ai = annihilation(space, c.i).matrix;
    const Matrix aj = annihilation(space, c.j).matrix;
    const double g = angular_from_mhz(c.g_mhz);
    if (form == CouplingForm::ExcitationConserving) {
      h += g * (ai.adjoint() * aj + ai * aj.adjoint());
    } else {
      const Matrix xi = ai + ai.adjoint();
      const Matrix xj = aj + aj.adjoint();
      h += g * (xi * xj);
    }
  }
  return h;
}

}  // namespace

Operator build_static_hamiltonian(const DeviceParams& params, const HilbertSpace& space, CouplingForm form,
                                  double frame_ghz) {
  check_space(params, space);
  return {space, static_matrix(params, space, form, frame_ghz)};
}

Operator build_lab_hamiltonian(const DeviceParams& params, const HilbertSpace& space) {
  return build_static_hamiltonian(params, space, CouplingForm::Full);
}

TimeDependentHamiltonian build_rotating_hamiltonian(const DeviceParams& params, const HilbertSpace& space,
                                                    const PulseSpec& pulse, int drive_qubit) {
  pulse.validate();
  if (!(pulse.carrier_ghz > 0.0)) throw ArgumentError("pulse.carrier must be positive");
  check_space(params, space);
  const double alpha = angular_from_mhz(params.anharm_mhz.at(drive_qubit));
  const Complex rot = std::polar(0.5, -pulse.phase);
  TimeDependentHamiltonian h{build_static_hamiltonian(params, space, CouplingForm::ExcitationConserving, pulse.carrier_ghz),
                             {},
                             {}};
  h.drives.push_back({creation(space, drive_qubit), [pulse, alpha, rot](double t) {
                        return rot * Complex(envelope(pulse, t), drag_quadrature(pulse, t, alpha));
                      }});
  const auto [a, b] = pulse.plateau();
  if (b > a) h.constant_intervals.emplace_back(a, b);
  return h;
}

TimeDependentHamiltonian build_full_lab_hamiltonian(const DeviceParams& params, const HilbertSpace& space,
                                                    const PulseSpec& pulse, int drive_qubit) {
  pulse.validate();
  check_space(params, space);
  TimeDependentHamiltonian h{build_lab_hamiltonian(params, space), {}, {}};
  // env * a^dag + conj(env) * a with a real env is env * (a + a^dag).
  h.drives.push_back({creation(space, drive_qubit), [pulse](double t) { return Complex(carrier_waveform(pulse, t), 0.0); }});
  return h;
}

Operator build_cw_hamiltonian(const DeviceParams& params, const HilbertSpace& space, const CWDriveSpec& cw) {
  check_space(params, space);
  const int n = params.qubits();
  if (static_cast<int>(cw.eps_mhz.size()) != n || static_cast<int>(cw.phase.size()) != n)
    throw ArgumentError("cw drive: one amplitude and one phase per qubit required");
  for (double e : cw.eps_mhz)
    if (e < 0.0) throw ArgumentError("cw drive: amplitudes must be non-negative");
  Matrix h = static_matrix(params, space, CouplingForm::ExcitationConserving, cw.freq_ghz);
  for (int q = 0; q < n; ++q) {
    if (cw.eps_mhz[q] == 0.0) continue;
    const Matrix a = annihilation(space, q).matrix;
    const Complex c = angular_from_mhz(cw.eps_mhz[q]) * std::polar(1.0, cw.phase[q]);
    h += c * a + std::conj(c) * a.adjoint();
  }
  return {space, h};
}

const DressedState& DressedBasis::find(std::span<const int> label) const {
  for (const auto& s : states)
    if (std::equal(s.label.begin(), s.label.end(), label.begin(), label.end())) return s;
  std::ostringstream os;
  os << "dressed basis has no state labeled |";
  for (int l : label) os << l;
  os << ">";
  throw ArgumentError(os.str());
}

namespace {

std::vector<std::vector<int>> computational_labels(int qubits) {
  std::vector<std::vector<int>> out;
  for (int k = 0; k < (1 << qubits); ++k) {
    std::vector<int> lv(qubits);
    for (int q = 0; q < qubits; ++q) lv[q] = (k >> (qubits - 1 - q)) & 1;
    out.push_back(lv);
  }
  return out;
}

}  // namespace

Matrix DressedBasis::computational_vectors() const {
  const auto labels = computational_labels(space.subsystems());
  Matrix v(space.size(), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t k = 0; k < labels.size(); ++k) v.col(k) = find(labels[k]).vector;
  return v;
}

RealVector DressedBasis::computational_energies() const {
  const auto labels = computational_labels(space.subsystems());
  RealVector e(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t k = 0; k < labels.size(); ++k) e(k) = find(labels[k]).energy;
  return e;
}

DressedBasis dressed_states(const Operator& hamiltonian) {
  const auto eig = eig_hermitian(hamiltonian);
  const int n = hamiltonian.size();
  const Eigen::MatrixXd overlap = eig.vectors.cwiseAbs2();  // (bare, eigen)

  std::vector<std::pair<int, int>> order;  // (bare, eigen) sorted by descending overlap
  order.reserve(static_cast<std::size_t>(n) * n);
  for (int e = 0; e < n; ++e)
    for (int b = 0; b < n; ++b) order.emplace_back(b, e);
  std::stable_sort(order.begin(), order.end(),
                   [&](const auto& x, const auto& y) { return overlap(x.first, x.second) > overlap(y.first, y.second); });

  std::vector<int> bare_of(n, -1);
  std::vector<char> bare_used(n, 0);
  int assigned = 0;
  for (const auto& [b, e] : order) {
    if (assigned == n) break;
    if (bare_of[e] >= 0 || bare_used[b]) continue;
    bare_of[e] = b;
    bare_used[b] = 1;
    ++assigned;
  }

  DressedBasis basis{hamiltonian.space, {}, {}};
  basis.states.reserve(n);
  for (int e = 0; e < n; ++e) {
    const int b = bare_of[e];
    DressedState s;
    s.label = hamiltonian.space.levels(b);
    s.energy = eig.values(e);
    s.vector = eig.vectors.col(e);
    const Complex amp = s.vector(b);
    if (std::abs(amp) > 0.0) s.vector *= std::conj(amp) / std::abs(amp);
    s.overlap = overlap(b, e);
    const bool computational = std::all_of(s.label.begin(), s.label.end(), [](int l) { return l <= 1; });
    if (computational && s.overlap < 0.5) {
      std::ostringstream os;
      os << "ambiguous dressed label |";
      for (int l : s.label) os << l;
      os << ">: best bare overlap " << s.overlap;
      basis.warnings.push_back(os.str());
    }
    basis.states.push_back(std::move(s));
  }
  return basis;
}

double ZZReport::at(Pair p) const {
  const auto it = xi_mhz.find(p);
  if (it == xi_mhz.end()) throw ArgumentError(std::string("ZZ report has no entry for pair ") + pair_name(p));
  return it->second;
}

double zz_combination(const std::function<double(const std::vector<int>&)>& energy, int qubits, int i, int j) {
  const auto state = [qubits, i, j](int bi, int bj) {
    std::vector<int> s(qubits, 0);
    s[i] = bi;
    s[j] = bj;
    return s;
  };
  return energy(state(1, 1)) + energy(state(0, 0)) - energy(state(1, 0)) - energy(state(0, 1));
}

namespace {

std::vector<Pair> pairs_for(int qubits) {
  if (qubits == 2) return {Pair::AB};
  if (qubits == 3) return {Pair::AB, Pair::BC, Pair::AC};
  throw ArgumentError("ZZ extraction supports two- or three-qubit devices");
}

}  // namespace

ZZReport static_zz(const DeviceParams& params, const ZZOptions& options) {
  const HilbertSpace space = params.space();
  const auto basis = dressed_states(build_static_hamiltonian(params, space, options.form));
  const auto energy = [&basis](const std::vector<int>& label) { return basis.find(label).energy; };
  ZZReport report;
  for (Pair p : pairs_for(params.qubits())) {
    const auto [i, j] = qubits_of(p);
    report.xi_mhz[p] = mhz_from_angular(zz_combination(energy, params.qubits(), i, j));
  }
  return report;
}

double follow_states(const HermitianEigen& eig, TrackedStates& tracked) {
  const Eigen::MatrixXd ov = (eig.vectors.adjoint() * tracked.vectors).cwiseAbs2();  // (eigen, tracked)
  const auto m = tracked.vectors.cols();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> order;
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index e = 0; e < ov.rows(); ++e)
      if (ov(e, c) > 1e-6) order.emplace_back(e, c);
  std::sort(order.begin(), order.end(), [&](const auto& x, const auto& y) { return ov(x.first, x.second) > ov(y.first, y.second); });
  std::vector<Eigen::Index> eig_of(m, -1);
  std::vector<char> used(ov.rows(), 0);
  for (const auto& [e, c] : order) {
    if (eig_of[c] >= 0 || used[e]) continue;
    eig_of[c] = e;
    used[e] = 1;
  }
  double worst = 1.0;
  for (Eigen::Index c = 0; c < m; ++c)
    if (eig_of[c] < 0) return 0.0;
  for (Eigen::Index c = 0; c < m; ++c) {
    worst = std::min(worst, ov(eig_of[c], c));
    Vector v = eig.vectors.col(eig_of[c]);
    const Complex phase = v.dot(tracked.vectors.col(c));  // keep a continuous gauge
    if (std::abs(phase) > 0.0) v *= phase / std::abs(phase);
    tracked.vectors.col(c) = v;
    tracked.energies(c) = eig.values(eig_of[c]);
  }
  return worst;
}

DressedBasis undriven_dressed_basis(const DeviceParams& params, CouplingForm form) {
  params.validate();
  return dressed_states(build_static_hamiltonian(params, params.space(), form));
}

ZZReport modulated_zz(const DeviceParams& params, const CWDriveSpec& cw, const ModulatedZZOptions& options) {
  const HilbertSpace space = params.space();
  const int n = params.qubits();
  const auto pairs = pairs_for(n);
  if (options.steps < 1) throw ArgumentError("modulated_zz: steps must be >= 1");
  const auto cw_at = [&cw](double s) {
    CWDriveSpec scaled = cw;
    for (double& e : scaled.eps_mhz) e *= s;
    return scaled;
  };

  CWDriveSpec zero = cw_at(0.0);
  const auto basis0 = dressed_states(build_cw_hamiltonian(params, space, zero));
  TrackedStates tracked{basis0.computational_vectors(), basis0.computational_energies()};

  constexpr double kMinOverlap = 0.5;
  // Advance from s0 to s1, halving the step where the match becomes ambiguous.
  std::function<void(double, double, int, int)> advance = [&](double s0, double s1, int depth, int step) {
    const auto eig = eig_hermitian(build_cw_hamiltonian(params, space, cw_at(s1)));
    TrackedStates trial = tracked;
    const double worst = follow_states(eig, trial);
    if (worst >= kMinOverlap && (worst >= 0.9 || depth >= options.max_refinements)) {
      tracked = std::move(trial);
      return;
    }
    if (depth >= options.max_refinements) {
      std::ostringstream os;
      os << "modulated_zz: adiabatic continuation lost track at ramp step " << step << "/" << options.steps
         << " (amplitude fraction " << s1 << ", overlap " << worst << ")";
      throw NumericalError(os.str());
    }
    const double mid = 0.5 * (s0 + s1);
    advance(s0, mid, depth + 1, step);
    advance(mid, s1, depth + 1, step);
  };
  for (int k = 1; k <= options.steps; ++k)
    advance(static_cast<double>(k - 1) / options.steps, static_cast<double>(k) / options.steps, 0, k);

  const auto energy = [&](const std::vector<int>& label) {
    int idx = 0;
    for (int l : label) idx = 2 * idx + l;
    return tracked.energies(idx);
  };
  ZZReport report;
  for (Pair p : pairs) {
    const auto [i, j] = qubits_of(p);
    report.xi_mhz[p] = mhz_from_angular(zz_combination(energy, n, i, j));
  }
  return report;
}

}  // namespace transim
