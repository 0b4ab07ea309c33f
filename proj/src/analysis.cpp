#include "transim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "transim/optimize.hpp"
#include "transim/parallel.hpp"

namespace transim {

namespace {

double mhz_detuning(const DeviceParams& p, int i, int j) { return 1e3 * p.detuning_ghz(i, j); }

void require_nonzero(double value, const char* factor, const char* where) {
  if (std::abs(value) < 1e-12) throw SingularityError(std::string(where) + ": vanishing factor " + factor);
}

void require_three(const DeviceParams& p, const char* where) {
  p.validate();
  if (p.qubits() != 3) throw ArgumentError(std::string(where) + ": needs a three-qubit device");
}

std::vector<int> label_of(const std::vector<int>& label, int qubits, const char* what) {
  if (static_cast<int>(label.size()) != qubits)
    throw ArgumentError(std::string(what) + " label has the wrong number of qubits");
  return label;
}

// Square-pulse rotating-frame eigensystem and dressed initial / target vectors.
struct SquareDrive {
  HermitianEigen eig;
  Vector c0;        // initial state in the eigenbasis
  Vector target_v;  // eigenbasis components of the target
};

SquareDrive square_drive(const DeviceParams& params, const DressedBasis& basis, double amp_mhz, double f_d_ghz,
                         const std::vector<int>& initial, const std::vector<int>& target) {
  const auto h = square_drive_hamiltonian(params, params.space(), amp_mhz, f_d_ghz, 1.0);
  Matrix m = h.static_part.matrix;
  const Matrix& op = h.drives.front().op.matrix;
  const Complex e = h.drives.front().envelope(0.5);
  m += e * op + std::conj(e) * op.adjoint();
  SquareDrive out;
  out.eig = eig_hermitian(m);
  out.c0 = out.eig.vectors.adjoint() * basis.find(initial).vector;
  out.target_v = out.eig.vectors.adjoint() * basis.find(target).vector;
  return out;
}

// |<target| e^{-iHt} |initial>|^2. Dressed states are eigenstates of the lab-frame
// static part, so the rotating-frame phase they pick up is irrelevant here.
double transfer_at(const SquareDrive& d, double t) {
  Complex acc = 0.0;
  for (Eigen::Index k = 0; k < d.c0.size(); ++k)
    acc += std::conj(d.target_v(k)) * std::exp(Complex(0.0, -d.eig.values(k) * t)) * d.c0(k);
  return std::norm(acc);
}

// Best transfer over a uniform time grid on (0, t_max], plus the time of the first maximum.
std::pair<double, double> peak_transfer(const SquareDrive& d, double t_max, int samples) {
  double best = 0.0;
  double t_best = 0.0;
  for (int k = 1; k <= samples; ++k) {
    const double t = t_max * k / samples;
    const double p = transfer_at(d, t);
    if (p > best) {
      best = p;
      t_best = t;
    }
  }
  return {best, t_best};
}

// Least-squares fit of a cos + b sin + c at fixed frequency (1/ns). Returns
// residual sum of squares; fills coefficients.
double sinusoid_rss(const std::vector<double>& t, const std::vector<double>& y, double nu, Eigen::Vector3d* coef) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double w = kTwoPi * nu * t[k];
    x(k, 0) = std::cos(w);
    x(k, 1) = std::sin(w);
    x(k, 2) = 1.0;
    b(k) = y[k];
  }
  const Eigen::Vector3d c = x.colPivHouseholderQr().solve(b);
  if (coef) *coef = c;
  return (x * c - b).squaredNorm();
}

}  // namespace

double perturbative_nu(const DeviceParams& params, double amp_mhz) {
  require_three(params, "perturbative_nu");
  const double d_ac = mhz_detuning(params, 0, 2);
  const double d_bc = mhz_detuning(params, 1, 2);
  const double d_ba_alpha = mhz_detuning(params, 1, 0) + params.anharm_mhz[1];
  require_nonzero(d_ac, "Delta_AC", "perturbative_nu");
  require_nonzero(d_bc, "Delta_BC", "perturbative_nu");
  require_nonzero(d_ba_alpha, "Delta_BA + alpha_B", "perturbative_nu");
  const double nu = 2.0 * params.g_mhz(0, 1) * params.g_mhz(1, 2) * params.anharm_mhz[1] * amp_mhz /
                    (d_ac * d_bc * d_ba_alpha);
  return std::abs(nu);
}

double perturbative_zz_nn(const DeviceParams& params, Pair pair) {
  params.validate();
  if (pair == Pair::AC) throw ArgumentError("perturbative_zz_nn: only nearest-neighbour pairs AB and BC");
  const auto [i, j] = qubits_of(pair);
  if (j >= params.qubits()) throw ArgumentError("perturbative_zz_nn: pair outside the device");
  const double d = mhz_detuning(params, i, j);
  const double ai = params.anharm_mhz[i];
  const double aj = params.anharm_mhz[j];
  require_nonzero(d + ai, "Delta_ij + alpha_i", "perturbative_zz_nn");
  require_nonzero(d - aj, "Delta_ij - alpha_j", "perturbative_zz_nn");
  const double g = params.g_mhz(i, j);
  return 2.0 * g * g * (ai + aj) / ((d + ai) * (d - aj));
}

FwmPrediction fwm_predict(const DeviceParams& params, double amp_mhz, double f_d_ghz) {
  require_three(params, "fwm_predict");
  const double d_drive = 1e3 * (f_d_ghz - params.freq_ghz[1]);
  require_nonzero(d_drive, "omega_d - omega_B", "fwm_predict");
  const double a_b = params.anharm_mhz[1];
  // The B junction carries the quartic nonlinearity; each partner mode borrows a
  // (g / Delta)^2 share of it. The prefactor 2|alpha_B| is E_J phi_B^4.
  auto chi = [&](int partner) {
    const double d = mhz_detuning(params, partner, 1);
    require_nonzero(d, "Delta to B", "fwm_predict");
    const double den = 1.0 + d / a_b;
    require_nonzero(den, "1 + Delta / alpha_B", "fwm_predict");
    const double r = params.g_mhz(partner, 1) / d;
    return 2.0 * std::abs(a_b) * r * r / den;
  };
  FwmPrediction out;
  out.xi_d = amp_mhz / d_drive;
  out.chi_ab_mhz = chi(0);
  out.chi_bc_mhz = chi(2);
  out.g3_mhz = -out.xi_d * std::sqrt(std::abs(out.chi_ab_mhz * out.chi_bc_mhz));
  // |001> <-> |110> absorbs one drive photon: omega_d = omega_A + omega_B - omega_C.
  const double shift_mhz =
      out.chi_bc_mhz + out.xi_d * out.xi_d * (2.0 * a_b + out.chi_bc_mhz - out.chi_ab_mhz);
  out.resonance_ghz = params.freq_ghz[1] + params.freq_ghz[0] - params.freq_ghz[2] - 1e-3 * shift_mhz;
  return out;
}

TimeDependentHamiltonian square_drive_hamiltonian(const DeviceParams& params, const HilbertSpace& space,
                                                  double amp_mhz, double f_d_ghz, double duration_ns,
                                                  double phase, int drive_qubit) {
  params.validate();
  if (drive_qubit < 0 || drive_qubit >= params.qubits()) throw ArgumentError("square drive: bad drive qubit");
  if (!(duration_ns >= 0.0)) throw ArgumentError("square drive: negative duration");
  TimeDependentHamiltonian h{build_static_hamiltonian(params, space, CouplingForm::ExcitationConserving, f_d_ghz),
                             {},
                             {}};
  const Complex value = 0.5 * angular_from_mhz(amp_mhz) * std::exp(Complex(0.0, -phase));
  h.drives.push_back({creation(space, drive_qubit), [value, duration_ns](double t) {
                        return (t >= 0.0 && t <= duration_ns) ? value : Complex(0.0);
                      }});
  if (duration_ns > 0.0) h.constant_intervals.push_back({0.0, duration_ns});
  return h;
}

RabiMap rabi_2d_scan(const DeviceParams& params, double amp_mhz, const std::vector<double>& freq_ghz,
                     const std::vector<double>& durations_ns, const ScanOptions& options) {
  params.validate();
  if (freq_ghz.empty() || durations_ns.empty()) throw ArgumentError("rabi_2d_scan: empty grid");
  for (std::size_t k = 0; k < durations_ns.size(); ++k) {
    if (durations_ns[k] < 0.0 || (k > 0 && durations_ns[k] <= durations_ns[k - 1]))
      throw ArgumentError("rabi_2d_scan: durations must be non-negative and strictly increasing");
  }
  const auto initial = label_of(options.initial, params.qubits(), "initial");
  const auto target = label_of(options.target, params.qubits(), "target");
  const DressedBasis basis = undriven_dressed_basis(params);
  const Vector psi0 = basis.find(initial).vector;
  const Vector tv = basis.find(target).vector;
  const double t_end = durations_ns.back();

  std::vector<double> grid;
  if (durations_ns.front() > 0.0) grid.push_back(0.0);
  grid.insert(grid.end(), durations_ns.begin(), durations_ns.end());
  const std::size_t skip = grid.size() - durations_ns.size();

  struct Row {
    std::vector<double> pop;
    std::string failure;
  };
  const auto rows = parallel_map<Row>(
      freq_ghz.size(),
      [&](std::size_t r) {
        Row row;
        row.pop.assign(durations_ns.size(), std::numeric_limits<double>::quiet_NaN());
        try {
          const auto h = square_drive_hamiltonian(params, params.space(), amp_mhz, freq_ghz[r], t_end);
          const auto traj = propagate_state(h, psi0, grid, options.integrator);
          for (std::size_t c = 0; c < durations_ns.size(); ++c)
            row.pop[c] = std::norm(tv.dot(traj.states[c + skip].col(0)));
        } catch (const NumericalError& e) {
          std::ostringstream msg;
          msg << "f_d=" << freq_ghz[r] << " GHz: " << e.what();
          row.failure = msg.str();
        }
        return row;
      },
      options.workers);

  RabiMap map{freq_ghz, durations_ns, Eigen::MatrixXd(freq_ghz.size(), durations_ns.size()), {}};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < durations_ns.size(); ++c)
      map.population(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].pop[c];
    if (!rows[r].failure.empty()) map.failures.push_back(rows[r].failure);
  }
  return map;
}

OscillationFit extract_oscillation_frequency(const std::vector<double>& times_ns, const std::vector<double>& values) {
  const std::size_t n = times_ns.size();
  if (n < 8 || values.size() != n) throw ArgumentError("extract_oscillation_frequency: need >= 8 paired samples");
  for (std::size_t k = 1; k < n; ++k)
    if (!(times_ns[k] > times_ns[k - 1])) throw ArgumentError("extract_oscillation_frequency: times must increase");
  for (double v : values)
    if (!std::isfinite(v)) throw ArgumentError("extract_oscillation_frequency: non-finite sample");

  const double span = times_ns.back() - times_ns.front();
  // Center times so the constant column stays well conditioned.
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = times_ns[k] - times_ns.front();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double total = 0.0;
  for (double v : values) total += (v - mean) * (v - mean);
  if (total <= 1e-24 * static_cast<double>(n))
    throw SearchError("extract_oscillation_frequency: flat trace, no spectral peak");

  // Zero-padded least-squares periodogram from half a period per span up to Nyquist.
  const double step = 1.0 / (8.0 * span);
  const double nu_lo = 0.5 / span;
  const double nu_hi = 0.5 * static_cast<double>(n - 1) / span;
  std::vector<double> power;
  std::vector<double> nus;
  for (double nu = nu_lo; nu <= nu_hi; nu += step) {
    nus.push_back(nu);
    power.push_back(1.0 - sinusoid_rss(t, values, nu, nullptr) / total);
  }
  const auto best = static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
  std::vector<double> sorted = power;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  if (power[best] < 0.3 && power[best] < 5.0 * median)
    throw SearchError("extract_oscillation_frequency: no spectral peak above the noise floor");

  const double a = std::max(nu_lo * 0.5, nus[best] - step);
  const double b = nus[best] + step;
  const auto opt = brent_minimize([&](double nu) { return sinusoid_rss(t, values, nu, nullptr); }, a, b,
                                  1e-9 * nus[best] + 1e-15, 200);
  Eigen::Vector3d c;
  const double rss = sinusoid_rss(t, values, opt.x, &c);
  OscillationFit fit;
  fit.nu_mhz = 1e3 * opt.x;
  fit.amplitude = std::hypot(c(0), c(1));
  fit.offset = c(2);
  // A cos(w (t - t0) + phi): shift the phase back to absolute time.
  fit.phase = std::remainder(std::atan2(-c(1), c(0)) - kTwoPi * opt.x * times_ns.front(), kTwoPi);
  fit.residual_rms = std::sqrt(rss / static_cast<double>(n));
  return fit;
}

std::vector<SpectrumPoint> broadband_spectrum(const DeviceParams& params, double amp_mhz,
                                              const std::vector<double>& freq_ghz, const BroadbandOptions& options) {
  params.validate();
  if (freq_ghz.empty()) throw ArgumentError("broadband_spectrum: empty frequency range");
  if (options.samples < 8 || !(options.duration_ns > 0.0)) throw ArgumentError("broadband_spectrum: bad time grid");
  const auto initial = label_of(options.initial, params.qubits(), "initial");
  const DressedBasis basis = undriven_dressed_basis(params);
  std::vector<double> times(options.samples);
  for (int k = 0; k < options.samples; ++k) times[k] = options.duration_ns * k / (options.samples - 1);

  return parallel_map<SpectrumPoint>(
      freq_ghz.size(),
      [&](std::size_t r) {
        SpectrumPoint pt;
        pt.freq_ghz = freq_ghz[r];
        try {
          const auto d = square_drive(params, basis, amp_mhz, freq_ghz[r], initial, initial);
          std::vector<double> trace(times.size());
          for (std::size_t k = 0; k < times.size(); ++k) trace[k] = transfer_at(d, times[k]);
          const auto [lo, hi] = std::minmax_element(trace.begin(), trace.end());
          pt.contrast = *hi - *lo;
          const auto fit = extract_oscillation_frequency(times, trace);
          pt.nu_mhz = fit.nu_mhz;
          pt.residual_rms = fit.residual_rms;
          pt.ok = true;
        } catch (const NumericalError& e) {
          pt.message = e.what();
        }
        return pt;
      },
      options.workers);
}

TransitionSearch find_transition_frequency(const DeviceParams& params, double amp_mhz,
                                           const TransitionOptions& options) {
  require_three(params, "find_transition_frequency");
  if (!(amp_mhz > 0.0)) throw ArgumentError("find_transition_frequency: amplitude must be positive");
  const std::vector<int> initial{0, 0, 1};
  const std::vector<int> target{1, 1, 0};
  const DressedBasis basis = undriven_dressed_basis(params);
  const auto& s001 = basis.find(initial);
  const auto& s110 = basis.find(target);

  TransitionSearch out;
  out.undriven_gap_ghz = ghz_from_angular(s110.energy - s001.energy);

  // Stark estimate: follow both dressed states up in drive amplitude and solve
  // E_110 - E_001 = 0 in the drive frame by Newton steps in f_d (slope ~ -1).
  double f = out.undriven_gap_ghz;
  std::vector<double> iterates{f};
  for (int it = 0; it < 4; ++it) {
    TrackedStates tracked{Matrix(basis.space.size(), 2), RealVector(2)};
    tracked.vectors.col(0) = s001.vector;
    tracked.vectors.col(1) = s110.vector;
    const int ramp = 8;
    for (int k = 1; k <= ramp; ++k) {
      const auto h = square_drive_hamiltonian(params, params.space(), amp_mhz * k / ramp, f, 1.0);
      const Complex e = h.drives.front().envelope(0.5);
      const Matrix& op = h.drives.front().op.matrix;
      const Matrix m = h.static_part.matrix + e * op + std::conj(e) * op.adjoint();
      if (follow_states(eig_hermitian(m), tracked) <= 0.0) break;
    }
    const double df = ghz_from_angular(tracked.energies(1) - tracked.energies(0));
    f += df;
    iterates.push_back(f);
    if (std::abs(df) < 1e-6) break;
  }

  const double nu_mhz = std::max(perturbative_nu(params, amp_mhz), 0.05);
  const double half_width_ghz = 1e-3 * std::max(3.0, 4.0 * nu_mhz);
  const int points = options.coarse_points > 0
                         ? options.coarse_points
                         : std::max(9, static_cast<int>(std::ceil(2.0 * half_width_ghz / (0.25e-3 * nu_mhz))) + 1);
  const double t_max = 1e3 / nu_mhz;  // two predicted half periods
  auto transfer = [&](double fd) { return peak_transfer(square_drive(params, basis, amp_mhz, fd, initial, target),
                                                        t_max, options.time_samples); };
  std::vector<double> grid;
  std::vector<std::pair<double, double>> coarse;
  std::size_t best = 0;
  auto scan = [&](double lo, double hi, int n) {
    out.window_lo_ghz = lo;
    out.window_hi_ghz = hi;
    grid.assign(n, 0.0);
    for (int k = 0; k < n; ++k) grid[k] = lo + (hi - lo) * k / (n - 1);
    coarse = parallel_map<std::pair<double, double>>(
        grid.size(), [&](std::size_t k) { return transfer(grid[k]); }, options.workers);
    out.evaluations += n;
    best = 0;
    for (std::size_t k = 1; k < coarse.size(); ++k)
      if (coarse[k].first > coarse[best].first) best = k;
    return coarse[best].first >= 0.5;
  };
  if (!scan(f - half_width_ghz, f + half_width_ghz, points)) {
    // Newton can wander near the anticrossing at strong coupling: cover every iterate.
    const auto [lo, hi] = std::minmax_element(iterates.begin(), iterates.end());
    const double a = *lo - half_width_ghz, b = *hi + half_width_ghz;
    const double spacing = (2.0 * half_width_ghz) / (points - 1);
    scan(a, b, std::max(points, static_cast<int>(std::ceil((b - a) / spacing)) + 1));
  }
  if (coarse[best].first < 0.5) {
    std::ostringstream msg;
    msg << "find_transition_frequency: best transfer " << coarse[best].first << " in [" << out.window_lo_ghz << ", "
        << out.window_hi_ghz << "] GHz is below 0.5";
    throw SearchError(msg.str());
  }
  const double h = grid[1] - grid[0];
  const auto fine = golden_maximize([&](double fd) { return transfer(fd).first; }, grid[best] - h, grid[best] + h,
                                    options.frequency_tolerance_ghz, 200);
  out.evaluations += fine.evaluations;
  out.f_s_ghz = fine.x;
  const auto [p, t_peak] = transfer(fine.x);
  out.peak_transfer = p;

  // Parabolic polish of the first-maximum time.
  const auto d = square_drive(params, basis, amp_mhz, fine.x, initial, target);
  const double dt = t_max / options.time_samples;
  out.half_period_ns = parabolic_vertex(t_peak - dt, transfer_at(d, t_peak - dt), t_peak, transfer_at(d, t_peak),
                                        t_peak + dt, transfer_at(d, t_peak + dt));
  return out;
}

double modulated_zz_analytic(const DeviceParams& params, const CWDriveSpec& cw, Pair pair) {
  params.validate();
  const auto [i, j] = qubits_of(pair);
  if (j >= params.qubits()) throw ArgumentError("modulated_zz_analytic: pair outside the device");
  if (static_cast<int>(cw.eps_mhz.size()) != params.qubits() || static_cast<int>(cw.phase.size()) != params.qubits())
    throw ArgumentError("modulated_zz_analytic: one amplitude and phase per qubit");
  const double di = 1e3 * cw.detuning_ghz(params, i);
  const double dj = 1e3 * cw.detuning_ghz(params, j);
  const double ai = params.anharm_mhz[i];
  const double aj = params.anharm_mhz[j];
  require_nonzero(di, "Delta_i", "modulated_zz_analytic");
  require_nonzero(dj, "Delta_j", "modulated_zz_analytic");
  require_nonzero(di + ai, "Delta_i + alpha_i", "modulated_zz_analytic");
  require_nonzero(dj + aj, "Delta_j + alpha_j", "modulated_zz_analytic");
  const double xi0 = static_zz(params).at(pair);
  const double tunable = 8.0 * params.g_mhz(i, j) * ai * aj * cw.eps_mhz[i] * cw.eps_mhz[j] *
                         std::cos(cw.phase[i] - cw.phase[j]) / (di * dj * (di + ai) * (dj + aj));
  return xi0 + tunable;
}

namespace {

std::string bracket_report(const std::vector<std::pair<double, double>>& scan) {
  auto [lo, hi] = std::minmax_element(scan.begin(), scan.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
  std::ostringstream msg;
  msg << "no sign change of xi_AB; scanned extrema " << lo->second << " MHz at " << lo->first << ", " << hi->second
      << " MHz at " << hi->first;
  return msg.str();
}

}  // namespace

StarkSearchResult stark_cancellation_search(const DeviceParams& params, const CWDriveSpec& cw_template,
                                            const StarkSearchOptions& options) {
  params.validate();
  const int q = params.qubits();
  if (static_cast<int>(cw_template.eps_mhz.size()) != q || static_cast<int>(cw_template.phase.size()) != q)
    throw ArgumentError("stark_cancellation_search: one amplitude and phase per qubit");
  if (options.scan_points < 3) throw ArgumentError("stark_cancellation_search: scan_points must be >= 3");
  StarkSearchResult out;
  out.zz_static = static_zz(params);
  out.cw = cw_template;

  if (q == 2) {
    std::function<CWDriveSpec(double)> make;
    double lo = 0.0;
    double hi = 0.0;
    if (options.free == StarkFree::Amplitude) {
      const double peak = *std::max_element(cw_template.eps_mhz.begin(), cw_template.eps_mhz.end());
      if (!(peak > 0.0)) throw ArgumentError("stark_cancellation_search: template amplitudes all zero");
      make = [&, peak](double s) {
        CWDriveSpec cw = cw_template;
        for (auto& e : cw.eps_mhz) e *= s / peak;
        return cw;
      };
      lo = options.amp_lo_mhz;
      hi = options.amp_hi_mhz;
      if (!(hi > lo)) throw ArgumentError("stark_cancellation_search: empty amplitude bracket");
    } else {
      make = [&](double phi) {
        CWDriveSpec cw = cw_template;
        cw.phase[0] = cw_template.phase[1] + phi;
        return cw;
      };
      lo = 0.0;
      hi = kTwoPi;
    }
    auto xi = [&](double x) { return modulated_zz(params, make(x), options.zz).at(Pair::AB); };
    for (int k = 0; k < options.scan_points; ++k) {
      const double x = lo + (hi - lo) * k / (options.scan_points - 1);
      out.scan.emplace_back(x, xi(x));
    }
    double scale = 0.0;
    for (const auto& s : out.scan) scale = std::max(scale, std::abs(s.second));
    if (scale < 1e-12) {
      out.coordinate = out.scan.front().first;  // identically zero: any point is a root
    } else {
      std::optional<std::size_t> sign_change;
      for (std::size_t k = 0; k + 1 < out.scan.size(); ++k) {
        if (out.scan[k].second == 0.0 || out.scan[k].second * out.scan[k + 1].second < 0.0) {
          sign_change = k;
          break;
        }
      }
      if (!sign_change) throw SearchError("stark_cancellation_search: " + bracket_report(out.scan));
      const auto k = *sign_change;
      out.coordinate = out.scan[k].second == 0.0
                           ? out.scan[k].first
                           : bisect(xi, out.scan[k].first, out.scan[k + 1].first, options.tolerance);
    }
    out.cw = make(out.coordinate);
    out.zz = modulated_zz(params, out.cw, options.zz);
    return out;
  }

  if (q != 3) throw ArgumentError("stark_cancellation_search: two or three qubits");
  // phi_A = phi_B + phi_AB, phi_C = phi_B - phi_BC.
  auto make = [&](double p_ab, double p_bc) {
    CWDriveSpec cw = cw_template;
    cw.phase[0] = cw_template.phase[1] + p_ab;
    cw.phase[2] = cw_template.phase[1] - p_bc;
    return cw;
  };
  std::map<Pair, double> weight;
  for (Pair p : kAllPairs) {
    const double s = std::abs(out.zz_static.at(p));
    weight[p] = options.relative_objective ? 1.0 / std::max(s, 1e-9) : 1.0;
  }
  auto objective = [&](double p_ab, double p_bc) {
    const auto zz = modulated_zz(params, make(p_ab, p_bc), options.zz);
    double worst = 0.0;
    for (Pair p : kAllPairs) worst = std::max(worst, weight[p] * std::abs(zz.at(p)));
    return worst;
  };
  const int n = options.scan_points;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> x0{0.0, 0.0};
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double pa = kTwoPi * a / n;
      const double pb = kTwoPi * b / n;
      const double v = objective(pa, pb);
      if (v < best) {
        best = v;
        x0 = {pa, pb};
      }
    }
  }
  NelderMeadOptions nm;
  nm.initial_step = kTwoPi / n / 2.0;
  nm.x_tolerance = options.tolerance;
  nm.f_tolerance = 1e-12;
  nm.max_evaluations = 400;
  const auto res = nelder_mead([&](const std::vector<double>& x) { return objective(x[0], x[1]); }, x0, nm);
  out.cw = make(std::remainder(res.x[0], kTwoPi), std::remainder(res.x[1], kTwoPi));
  out.zz = modulated_zz(params, out.cw, options.zz);
  return out;
}

}  // namespace transim
