#pragma once

// Computational-subspace gates: extraction from a full propagator, virtual-Z and
// CPhase compensation, the ideal |001> <-> |110> exchange target, average gate
// fidelity, the four-stage calibration pipeline and iFredkin composition.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "transim/analysis.hpp"
#include "transim/dynamics.hpp"
#include "transim/model.hpp"

namespace transim {

/// 8 x 8, basis |000>, |001>, ..., |111> with A most significant.
using GateMatrix = Eigen::Matrix<Complex, 8, 8>;

struct PhaseCorrection {
  double theta_ab = 0.0;
  double theta_bc = 0.0;
  double phi_a = 0.0;
  double phi_b = 0.0;
  double phi_c = 0.0;
  double phi_drive = 0.0;

  /// Every angle folded into [0, 2 pi).
  PhaseCorrection wrapped() const;
};

/// U_ij = <dressed_i| prop |dressed_j> over the computational labels.
GateMatrix extract_computational_unitary(const Matrix& prop, const DressedBasis& basis);

/// (Rz(phi_A) x Rz(phi_B) x Rz(phi_C)) diag[1,1,1,e^{-i theta_BC},1,1,e^{-i theta_AB},e^{-i(theta_AB+theta_BC)}],
/// Rz(phi) = diag(e^{-i phi/2}, e^{i phi/2}). The drive phase is not part of it.
GateMatrix u_phase(const PhaseCorrection& corr);

/// Identity except |001> <-> |110> with amplitude -i.
GateMatrix ideal_gate();

/// (|Tr(U_ideal^dag U)|^2 + Tr(U^dag U)) / 72.
double average_gate_fidelity(const GateMatrix& u, const GateMatrix& ideal);

struct PhaseSearchOptions {
  int restarts = 4;
  std::uint64_t seed = 1;
  /// theta_AB, theta_BC starting point (xi * tau); single-qubit seeds always come
  /// from the diagonal of the raw gate.
  std::optional<std::pair<double, double>> theta_seed;
  bool optimize_drive_phase = true;
  int drive_phase_grid = 8;            // coarse points over one period
  double drive_phase_tolerance = 1e-4; // rad
  double drive_phase_center = 0.0;
  double drive_phase_half_width = 0.0; // > 0 restricts the search to center +- half width
};

struct PhaseOptimization {
  PhaseCorrection correction;
  double fidelity = 0.0;
  GateMatrix raw;        // at the chosen drive phase
  GateMatrix corrected;  // u_phase * raw
  int simulations = 0;   // calls of the raw-gate callable
};

/// Best five-angle correction of a fixed raw gate.
PhaseOptimization optimize_phase_angles(const GateMatrix& raw, const GateMatrix& ideal,
                                        const PhaseSearchOptions& options = {});

/// Six parameters: an outer search over the drive phase (each candidate calls
/// `raw`, i.e. re-simulates) around the inner five-angle optimization.
/// CalibrationError below F = 0.5.
PhaseOptimization optimize_phase_correction(const std::function<GateMatrix(double)>& raw, const GateMatrix& ideal,
                                            const PhaseSearchOptions& options = {});

enum class Frame { Rotating, Lab };

/// Dressed basis matching a frame: RWA couplings for Rotating, full couplings for Lab.
DressedBasis frame_dressed_basis(const DeviceParams& params, Frame frame);

/// Gate of a pulse in the drive rotating frame. Lab-frame runs are moved into the
/// rotating frame by exp(i w_d N tau) so both frames share one phase convention.
GateMatrix simulate_gate(const DeviceParams& params, const PulseSpec& pulse, Frame frame = Frame::Rotating,
                         const IntegratorOptions& integrator = {});

/// Dressed |110> population after the pulse from dressed |001>.
double simulate_transfer(const DeviceParams& params, const PulseSpec& pulse, Frame frame = Frame::Rotating,
                         const IntegratorOptions& integrator = {});

struct CalibrationOptions {
  double sigma_ns = 10.0;
  double drag = 0.0;
  bool refine_drag = false;
  Frame frame = Frame::Rotating;
  int duration_scan_half_points = 8;  // scan center +- this many nu/40 steps
  int refine_evaluations = 120;
  IntegratorOptions integrator{};
  TransitionOptions transition{};
  PhaseSearchOptions phase{};
};

struct CalibrationResult {
  TransitionSearch transition;
  double f_s_ghz = 0.0;      // stage 1 transition frequency
  double f_d_ghz = 0.0;      // refined carrier
  double duration_ns = 0.0;
  double drag = 0.0;
  double transfer = 0.0;     // stage 3 |001> -> |110> population
  PhaseCorrection correction;
  double fidelity = 0.0;
  GateMatrix raw;            // before phase correction
  GateMatrix gate;           // after phase correction
  std::vector<std::pair<double, double>> duration_scan;  // (tau ns, transfer)
  int simulations = 0;

  PulseSpec pulse(double amp_mhz, double sigma_ns) const;
};

/// (1) transition frequency, (2) shortest full-exchange duration, (3) local
/// refinement of (f_d, tau[, lambda]) for transfer, (4) gate extraction and phase
/// correction. Failures surface as CalibrationError naming the stage.
CalibrationResult calibrate_gate(const DeviceParams& params, double amp_mhz, const CalibrationOptions& options = {});

/// Ideal CNOT between two qubits of the three-qubit register.
struct FrameComparisonOptions {
  IntegratorOptions lab_integrator{};
  bool retune = true;               // re-optimize (f_d, tau) for transfer in the lab frame
  double retune_window_ghz = 4e-4;  // carrier search: seed +- window
  double retune_tolerance_ghz = 3e-6;
  double retune_duration_step_ns = 8.0;
  double drive_phase_half_width = 0.05;
  int drive_phase_grid = 3;
};

struct FrameComparison {
  double f_d_lab_ghz = 0.0;
  double duration_lab_ns = 0.0;
  double transfer_lab = 0.0;
  double static_shift_ghz = 0.0;   // undriven |110>-|001> gap, full minus RWA couplings
  GateMatrix raw_lab;              // lab gate at the rotating-frame drive phase
  PhaseOptimization lab;
  double max_population_difference = 0.0;
  double fidelity_difference = 0.0;
  int simulations = 0;
};

/// Lab-frame counterpart of a rotating-frame calibration. Counter-rotating terms
/// move the resonance by a fraction of its width, so with `retune` the carrier and
/// duration are re-optimized in the lab frame (golden search on the carrier seeded
/// from the static shift, then a three-point parabola in tau) before populations
/// and optimized fidelities are compared.
FrameComparison compare_frames(const DeviceParams& params, double amp_mhz, const CalibrationResult& rotating,
                               double sigma_ns, const FrameComparisonOptions& options = {});

GateMatrix cnot(int control, int target);

enum class FredkinLayout { A, B, C, D };

FredkinLayout fredkin_layout_from_string(const std::string& name);
const char* fredkin_layout_name(FredkinLayout layout);

/// W base W with the nearest-neighbour CNOT W of the layout:
/// A: CNOT(A->B), |0>-control on B swaps A and C (|001> <-> |100>);
/// B: CNOT(B->A), |0>-control on A swaps B and C (|001> <-> |010>);
/// C: CNOT(C->B), |1>-control on B swaps A and C (|011> <-> |110>);
/// D: CNOT(B->C), |001> <-> |111>.
/// Each exchange carries the -i of the base gate.
GateMatrix compose_ifredkin(const GateMatrix& base, FredkinLayout layout);

/// Basis-state pair exchanged by a layout.
std::pair<int, int> fredkin_exchanged_pair(FredkinLayout layout);

}  // namespace transim
