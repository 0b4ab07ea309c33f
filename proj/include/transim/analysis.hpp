#pragma once

// Perturbative predictors, spectroscopy scans, oscillation fitting, transition
// search and CW-Stark ZZ cancellation.

#include <optional>
#include <string>
#include <vector>

#include "transim/dynamics.hpp"
#include "transim/model.hpp"

namespace transim {

/// nu = 2 g_AB g_BC alpha_B Omega / [D_AC D_BC (D_BA + alpha_B)], in MHz.
double perturbative_nu(const DeviceParams& params, double amp_mhz);

/// xi = 2 g^2 (alpha_i + alpha_j) / [(D_ij + alpha_i)(D_ij - alpha_j)], in MHz. Pair AB or BC.
double perturbative_zz_nn(const DeviceParams& params, Pair pair);

struct FwmPrediction {
  double xi_d = 0.0;          // Omega / (omega_d - omega_B)
  double chi_ab_mhz = 0.0;
  double chi_bc_mhz = 0.0;
  double g3_mhz = 0.0;        // -xi_d sqrt(chi_AB chi_BC)
  double resonance_ghz = 0.0; // driven |001> <-> |110> resonance
};

/// Displaced-frame four-wave-mixing estimate at drive frequency f_d.
FwmPrediction fwm_predict(const DeviceParams& params, double amp_mhz, double f_d_ghz);

/// Rotating-frame Hamiltonian for a square drive of constant amplitude on [0, duration].
TimeDependentHamiltonian square_drive_hamiltonian(const DeviceParams& params, const HilbertSpace& space,
                                                  double amp_mhz, double f_d_ghz, double duration_ns,
                                                  double phase = 0.0, int drive_qubit = 1);

struct ScanOptions {
  std::vector<int> initial{0, 0, 1};
  std::vector<int> target{1, 1, 0};
  int workers = 1;
  IntegratorOptions integrator{};
};

/// Dressed-target population after a square pulse; rows follow f_d, columns follow duration.
struct RabiMap {
  std::vector<double> freq_ghz;
  std::vector<double> durations_ns;
  Eigen::MatrixXd population;      // NaN where a cell failed
  std::vector<std::string> failures;
};

RabiMap rabi_2d_scan(const DeviceParams& params, double amp_mhz, const std::vector<double>& freq_ghz,
                     const std::vector<double>& durations_ns, const ScanOptions& options = {});

struct OscillationFit {
  double nu_mhz = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double phase = 0.0;
  double residual_rms = 0.0;
};

/// Fits A cos(2 pi nu t + phi) + C to a trace; times in ns. The periodogram peak
/// seeds a one-dimensional least-squares refinement of nu.
OscillationFit extract_oscillation_frequency(const std::vector<double>& times_ns, const std::vector<double>& values);

struct SpectrumPoint {
  double freq_ghz = 0.0;
  double nu_mhz = 0.0;
  double contrast = 0.0;   // max - min of the trace
  double residual_rms = 0.0;
  bool ok = false;
  std::string message;
};

struct BroadbandOptions {
  double duration_ns = 2000.0;
  int samples = 512;
  std::vector<int> initial{0, 0, 1};
  int workers = 1;
};

/// Dominant oscillation frequency of the initial-state population per drive frequency.
std::vector<SpectrumPoint> broadband_spectrum(const DeviceParams& params, double amp_mhz,
                                              const std::vector<double>& freq_ghz,
                                              const BroadbandOptions& options = {});

struct TransitionSearch {
  double f_s_ghz = 0.0;
  double peak_transfer = 0.0;
  double half_period_ns = 0.0;   // time of the first transfer maximum (square pulse)
  double window_lo_ghz = 0.0;
  double window_hi_ghz = 0.0;
  double undriven_gap_ghz = 0.0;
  int evaluations = 0;
};

struct TransitionOptions {
  int coarse_points = 0;             // 0 -> resolve the window at a quarter linewidth
  double frequency_tolerance_ghz = 2e-6;
  int time_samples = 600;
  int workers = 1;
};

/// Drive frequency of maximal |0~01> -> |1~10> transfer under a square pulse.
TransitionSearch find_transition_frequency(const DeviceParams& params, double amp_mhz,
                                           const TransitionOptions& options = {});

/// Perturbative CW-modulated ZZ for a pair (default AB), static term from static_zz.
double modulated_zz_analytic(const DeviceParams& params, const CWDriveSpec& cw, Pair pair = Pair::AB);

enum class StarkFree { Amplitude, Phase };

struct StarkSearchOptions {
  StarkFree free = StarkFree::Amplitude;
  double amp_lo_mhz = 1.0;     // amplitude bracket for the common drive scale
  double amp_hi_mhz = 80.0;
  int scan_points = 24;
  double tolerance = 1e-4;     // MHz for amplitude, rad for phase
  bool relative_objective = true;  // three-qubit: weigh each pair by its static magnitude
  ModulatedZZOptions zz{};
};

struct StarkSearchResult {
  CWDriveSpec cw;
  ZZReport zz;
  ZZReport zz_static;
  double coordinate = 0.0;     // root amplitude (MHz) or phase (rad); unused for the three-qubit search
  std::vector<std::pair<double, double>> scan;  // (coordinate, xi_AB) along the 1-D scan
};

/// Two qubits: root of numeric xi_AB along the free coordinate (bisection inside a
/// scanned sign change). With amplitude free, nonzero template entries are scaled
/// together so that the largest equals the trial amplitude. Three qubits: minimizes
/// the largest residual |xi_ij| over (phi_AB, phi_BC) at fixed amplitudes.
StarkSearchResult stark_cancellation_search(const DeviceParams& params, const CWDriveSpec& cw_template,
                                            const StarkSearchOptions& options = {});

}  // namespace transim
