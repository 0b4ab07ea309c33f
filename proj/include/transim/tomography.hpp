#pragma once

// Process tomography on the dressed computational subspace: 64 product inputs,
// chi-matrix linear inversion with physicality projection, process fidelity and
// the open-system run of a calibrated gate.

#include <array>
#include <vector>

#include "transim/dynamics.hpp"
#include "transim/gates.hpp"

namespace transim {

using Matrix8 = Eigen::Matrix<Complex, 8, 8>;

/// {I, X, -iY, Z}^(x3), index 16 a + 4 b + c with A most significant.
struct PauliBasis {
  std::vector<Matrix8> ops;
  static PauliBasis three_qubit();
};

const PauliBasis& pauli_basis();

/// chi in the Pauli basis; unitary channels have trace 1.
struct ChiMatrix {
  Matrix chi;     // 64 x 64 after Hermitization, clipping and trace renormalization
  Matrix linear;  // plain linear-inversion result
};

/// {|0>, |1>, (|0>+|1>)/sqrt2, (|0>-i|1>)/sqrt2}^(x3) as 8 x 8 density matrices; first |000><000|.
std::vector<Matrix8> input_state_set();

/// The same states written on the dressed computational vectors of the full space.
std::vector<Matrix> input_state_set(const DressedBasis& basis);

/// Least-squares solve of rho_out = sum chi_mn E_m rho_in E_n^dag over all pairs,
/// then Hermitize, clip negative eigenvalues, renormalize the trace.
ChiMatrix reconstruct_chi(const std::vector<Matrix8>& inputs, const std::vector<Matrix8>& outputs);

/// chi = c c^dag with c_n = Tr(E_n^dag U) / 8.
ChiMatrix ideal_chi(const Matrix8& u);

/// Re Tr(chi_ideal chi) clipped to [0, 1].
double process_fidelity(const ChiMatrix& chi, const ChiMatrix& chi_ideal);

/// rho -> U rho U^dag applied to every input.
std::vector<Matrix8> apply_unitary_channel(const Matrix8& u, const std::vector<Matrix8>& inputs);

struct QptOptions {
  IntegratorOptions integrator{};
  bool unitary_shortcut = true;   // closed-system runs propagate 8 columns instead of 64 density matrices
  bool refine_phases = true;
  int refine_evaluations = 2000;
  int workers = 1;
};

struct QptResult {
  ChiMatrix chi;
  double fidelity = 0.0;          // after refinement
  double fidelity_initial = 0.0;  // with the calibration's correction
  PhaseCorrection correction;
  std::vector<double> leakage;    // discarded out-of-subspace weight per input
  double max_leakage = 0.0;
  IntegratorStats stats;
};

/// Runs the calibrated pulse on all 64 inputs (master equation when dec is not
/// trivial), applies the phase correction, reconstructs chi and refines the five
/// virtual angles with the drive phase fixed.
QptResult qpt_run(const DeviceParams& params, double amp_mhz, double sigma_ns, const CalibrationResult& calibration,
                  const DecoherenceSpec& dec, const QptOptions& options = {});

}  // namespace transim
