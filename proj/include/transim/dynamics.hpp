#pragma once

// Time evolution under a TimeDependentHamiltonian: pure states / propagators
// (Schrodinger) and density matrices (Lindblad).
//
// Integration runs in the interaction frame of the static diagonal, where the
// fast bare phases are analytic and only couplings and drives remain, with an
// adaptive Dormand-Prince 5(4) stepper and dense output at the requested times.
// Intervals flagged constant on the Hamiltonian are propagated exactly through
// an eigendecomposition.

#include <limits>
#include <vector>

#include "transim/model.hpp"

namespace transim {

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step_ns = 0.0;   // 0 = unbounded
  long max_steps = 20'000'000;
  bool exact_constant_intervals = true;
  /// Master equation by symmetric splitting: exact closed-system substep propagators
  /// between half steps of the exact dissipator flow. Off = Dormand-Prince on rho.
  bool lindblad_splitting = true;
  double lindblad_step_ns = 0.5;
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
  long exact_segments = 0;
};

/// Per-qubit T1 and T2* in microseconds (infinity = no decoherence).
struct DecoherenceSpec {
  std::vector<double> t1_us;
  std::vector<double> t2star_us;

  static DecoherenceSpec none(int qubits);
  static DecoherenceSpec uniform(int qubits, double t1_us, double t2star_us);

  int qubits() const { return static_cast<int>(t1_us.size()); }
  /// 1 / T1 in 1/ns.
  double gamma1(int q) const;
  /// 1 / T2* - 1 / (2 T1) in 1/ns.
  double gamma_phi(int q) const;
  bool trivial() const;
  void validate() const;
};

/// Sampled evolution. `states[k]` is the state at `times[k]`: an n x m block of
/// column vectors for pure evolution, an n x n density matrix for open evolution.
struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
  IntegratorStats stats;
};

/// Solves i d psi/dt = H(t) psi from t_grid.front(), sampling at every grid time.
/// psi0 may hold several columns; they are evolved together.
Trajectory propagate_state(const TimeDependentHamiltonian& h, const Matrix& psi0, const std::vector<double>& t_grid,
                           const IntegratorOptions& options = {});

/// Evolution of the columns of `initial` (identity when empty) from 0 to T.
Matrix propagator(const TimeDependentHamiltonian& h, double duration_ns, const IntegratorOptions& options = {},
                  const Matrix& initial = Matrix());

/// Collapse operators per qubit restricted to {|0>,|1>}:
/// sqrt(G1)|0><1| and sqrt(Gphi/2)(|0><0| - |1><1|), identity elsewhere.
std::vector<Operator> collapse_operators(const HilbertSpace& space, const DecoherenceSpec& dec);

/// d rho/dt = -i[H, rho] + sum_L (L rho L^dag - 1/2 {L^dag L, rho}).
Trajectory lindblad_propagate(const TimeDependentHamiltonian& h, const Matrix& rho0, const DecoherenceSpec& dec,
                              const std::vector<double>& t_grid, const IntegratorOptions& options = {});

/// Several density matrices evolved under one shared adaptive step sequence.
/// Returns the final states only.
std::vector<Matrix> lindblad_propagate_batch(const TimeDependentHamiltonian& h, const std::vector<Matrix>& rho0,
                                             const DecoherenceSpec& dec, double duration_ns,
                                             const IntegratorOptions& options = {}, IntegratorStats* stats = nullptr);

}  // namespace transim
