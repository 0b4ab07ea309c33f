#pragma once

// Device description and every Hamiltonian variant used by the simulator:
// undriven lab frame, drive rotating frame (RWA), full lab frame with carrier,
// and the CW-Stark drive frame. Plus dressed-state labeling and ZZ extraction.
//
// Conventions: qubit 0 = A, 1 = B, 2 = C; basis |n_A n_B n_C> with A most
// significant. Parameters are stored in ordinary-frequency units (GHz for
// qubit/drive frequencies, MHz for anharmonicities, couplings, amplitudes);
// operators come out in rad/ns.

#include <array>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "transim/operators.hpp"
#include "transim/pulses.hpp"

namespace transim {

enum class Pair { AB, BC, AC };

inline constexpr std::array<Pair, 3> kAllPairs{Pair::AB, Pair::BC, Pair::AC};

std::pair<int, int> qubits_of(Pair p);
const char* pair_name(Pair p);

struct Coupling {
  int i = 0;
  int j = 0;
  double g_mhz = 0.0;
};

/// Transmon chain parameters.
struct DeviceParams {
  std::vector<double> freq_ghz;
  std::vector<double> anharm_mhz;
  std::vector<Coupling> couplings;
  std::vector<int> levels;

  int qubits() const { return static_cast<int>(freq_ghz.size()); }
  double g_mhz(int i, int j) const;
  void set_g_mhz(int i, int j, double value);
  double g_mhz(Pair p) const { return g_mhz(qubits_of(p).first, qubits_of(p).second); }
  /// f_i - f_j in GHz.
  double detuning_ghz(int i, int j) const { return freq_ghz.at(i) - freq_ghz.at(j); }
  HilbertSpace space() const { return HilbertSpace(levels); }
  void validate() const;
};

/// Three-transmon device: f = {5.641, 6.517, 5.507} GHz, alpha = {-300, -381, -303} MHz,
/// g_AB = 40, g_BC = 31, g_AC = 1.9 MHz, 5 levels each.
DeviceParams paper_device(int levels = 5);

/// The isolated A-B pair of the same device (used for CW-Stark scans).
DeviceParams paper_pair_device(int levels = 7);

/// How the capacitive coupling is written.
enum class CouplingForm {
  ExcitationConserving,  // g (a_i^dag a_j + a_i a_j^dag)
  Full,                  // g (a_i + a_i^dag)(a_j + a_j^dag)
};

struct DriveTerm {
  Operator op;
  std::function<Complex(double)> envelope;  // rad/ns
};

/// H(t) = static + sum_k [env_k(t) op_k + conj(env_k(t)) op_k^dag].
struct TimeDependentHamiltonian {
  Operator static_part;
  std::vector<DriveTerm> drives;
  /// Intervals on which every envelope is constant; propagators may treat them exactly.
  std::vector<std::pair<double, double>> constant_intervals;

  const HilbertSpace& space() const { return static_part.space; }
  Matrix at(double t) const;
};

/// sum_i [w_i n_i + alpha_i/2 n_i(n_i - 1)] + couplings, with every w_i shifted by -frame_ghz.
Operator build_static_hamiltonian(const DeviceParams& params, const HilbertSpace& space, CouplingForm form,
                                  double frame_ghz = 0.0);

/// Undriven lab-frame Hamiltonian with full (a + a^dag)(a + a^dag) couplings.
Operator build_lab_hamiltonian(const DeviceParams& params, const HilbertSpace& space);

/// Rotating frame at the pulse carrier, RWA couplings, drive
/// (1/2)[Omega(t) + i Q(t)] e^{-i phi_d} a_B^dag + h.c.
TimeDependentHamiltonian build_rotating_hamiltonian(const DeviceParams& params, const HilbertSpace& space,
                                                    const PulseSpec& pulse, int drive_qubit = 1);

/// Lab frame with full couplings and Omega(t) cos(w_d t + phi_d)(a_B + a_B^dag).
TimeDependentHamiltonian build_full_lab_hamiltonian(const DeviceParams& params, const HilbertSpace& space,
                                                    const PulseSpec& pulse, int drive_qubit = 1);

/// Simultaneous CW tones at one frequency, one amplitude/phase per qubit.
struct CWDriveSpec {
  double freq_ghz = 0.0;
  std::vector<double> eps_mhz;
  std::vector<double> phase;

  double detuning_ghz(const DeviceParams& p, int q) const { return p.freq_ghz.at(q) - freq_ghz; }
};

/// Time-independent Hamiltonian in the CW drive frame:
/// sum_i [D_i n_i + alpha_i/2 a^dag a^dag a a] + RWA couplings + sum_i eps_i (e^{i phi_i} a_i + h.c.).
Operator build_cw_hamiltonian(const DeviceParams& params, const HilbertSpace& space, const CWDriveSpec& cw);

struct DressedState {
  std::vector<int> label;
  double energy = 0.0;  // rad/ns
  Vector vector;        // phase fixed so <bare|dressed> is real and positive
  double overlap = 0.0; // |<bare|dressed>|^2
};

struct DressedBasis {
  HilbertSpace space;
  std::vector<DressedState> states;  // ascending energy
  std::vector<std::string> warnings;

  const DressedState& find(std::span<const int> label) const;
  const DressedState& find(std::initializer_list<int> label) const {
    return find(std::span<const int>(label.begin(), label.size()));
  }
  /// Dressed |00..0> ... |11..1> as columns, binary order with subsystem 0 most significant.
  Matrix computational_vectors() const;
  RealVector computational_energies() const;
};

/// Labels every eigenvector of H with the bare product state of largest overlap
/// (greedy in descending overlap, injective). Computational states with overlap
/// below 0.5 produce a warning rather than a failure.
DressedBasis dressed_states(const Operator& hamiltonian);

/// Dressed basis of the undriven device in the lab frame, where excitation-number
/// blocks are well separated in energy.
DressedBasis undriven_dressed_basis(const DeviceParams& params,
                                    CouplingForm form = CouplingForm::ExcitationConserving);

/// Columns followed through a family of Hermitian operators.
struct TrackedStates {
  Matrix vectors;
  RealVector energies;
};

/// Re-assigns every tracked column to the eigenvector it overlaps most (greedy,
/// injective, gauge kept continuous). Returns the smallest matched overlap, 0 if
/// some column found no partner.
double follow_states(const HermitianEigen& eig, TrackedStates& tracked);

struct ZZReport {
  std::map<Pair, double> xi_mhz;
  double at(Pair p) const;
};

struct ZZOptions {
  CouplingForm form = CouplingForm::ExcitationConserving;
};

/// xi_ij = E(1_i 1_j) + E(0_i 0_j) - E(1_i 0_j) - E(0_i 1_j), spectator in |0>, from dressed
/// energies of the undriven Hamiltonian.
ZZReport static_zz(const DeviceParams& params, const ZZOptions& options = {});

struct ModulatedZZOptions {
  int steps = 20;          // uniform amplitude ramp from 0 to the target
  int max_refinements = 8; // step halvings allowed where tracking is ambiguous
};

/// Same energy combination on eigenstates of the CW-frame Hamiltonian, labeled by
/// adiabatic continuation in the drive amplitude.
ZZReport modulated_zz(const DeviceParams& params, const CWDriveSpec& cw, const ModulatedZZOptions& options = {});

/// Energy combination over pair (i, j) given a lookup of labeled energies (rad/ns).
double zz_combination(const std::function<double(const std::vector<int>&)>& energy, int qubits, int i, int j);

}  // namespace transim
