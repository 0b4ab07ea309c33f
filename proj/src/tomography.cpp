#include "transim/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "transim/optimize.hpp"

namespace transim {

namespace {

using Matrix2 = Eigen::Matrix<Complex, 2, 2>;
using Matrix64 = Eigen::MatrixXcd;  // 64 x 64

Matrix8 kron3(const Matrix2& a, const Matrix2& b, const Matrix2& c) {
  Matrix8 out;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      out(i, j) = a(i >> 2, j >> 2) * b((i >> 1) & 1, (j >> 1) & 1) * c(i & 1, j & 1);
  return out;
}

std::array<Matrix2, 4> single_paulis() {
  Matrix2 id = Matrix2::Identity();
  Matrix2 x;
  x << 0, 1, 1, 0;
  Matrix2 my;  // -i sigma_y
  my << 0, -1, 1, 0;
  Matrix2 z;
  z << 1, 0, 0, -1;
  return {id, x, my, z};
}

// Column-stacked vec of every basis operator.
const Matrix64& basis_columns() {
  static const Matrix64 p = [] {
    Matrix64 m(64, 64);
    const auto& ops = pauli_basis().ops;
    for (int n = 0; n < 64; ++n) m.col(n) = Eigen::Map<const Eigen::Matrix<Complex, 64, 1>>(ops[n].data());
    return m;
  }();
  return p;
}

Eigen::Matrix<Complex, 64, 1> vec(const Matrix8& m) { return Eigen::Map<const Eigen::Matrix<Complex, 64, 1>>(m.data()); }

// chi from the superoperator S (column stacking, vec(A X B) = (B^T x A) vec X):
// the Choi reshuffle J[i + 8k, j + 8l] = S[i + 8j, k + 8l], then chi = P^dag J P / 64.
Matrix64 chi_from_superoperator(const Matrix64& s) {
  Matrix64 j(64, 64);
  for (int i = 0; i < 8; ++i)
    for (int k = 0; k < 8; ++k)
      for (int jj = 0; jj < 8; ++jj)
        for (int l = 0; l < 8; ++l) j(i + 8 * k, jj + 8 * l) = s(i + 8 * jj, k + 8 * l);
  const Matrix64& p = basis_columns();
  return p.adjoint() * j * p / 64.0;
}

Matrix project_physical(const Matrix64& linear) {
  const Matrix64 h = 0.5 * (linear + linear.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix64> es(h);
  Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
  const double tr = w.sum();
  if (!(tr > 0.0)) throw NumericalError("reconstruct_chi: projected chi has no positive weight");
  w /= tr;
  Matrix64 out = es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return out;
}

// Pseudo-inverse of the input design, reused across refinement evaluations.
struct InputDesign {
  Eigen::MatrixXcd pinv;  // k x 64 -> S = Out * pinv
};

InputDesign make_design(const std::vector<Matrix8>& inputs) {
  const auto k = static_cast<Eigen::Index>(inputs.size());
  Eigen::MatrixXcd in(64, k);
  for (Eigen::Index c = 0; c < k; ++c) in.col(c) = vec(inputs[c]);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(in);
  cod.setThreshold(1e-10);
  if (cod.rank() < 64) {
    std::ostringstream msg;
    msg << "reconstruct_chi: input design has rank " << cod.rank() << " < 64";
    throw NumericalError(msg.str());
  }
  return {cod.pseudoInverse()};
}

ChiMatrix reconstruct(const InputDesign& design, const std::vector<Matrix8>& outputs) {
  const auto k = static_cast<Eigen::Index>(outputs.size());
  if (k != design.pinv.rows()) throw ArgumentError("reconstruct_chi: input/output count mismatch");
  Eigen::MatrixXcd out(64, k);
  for (Eigen::Index c = 0; c < k; ++c) out.col(c) = vec(outputs[c]);
  const Matrix64 s = out * design.pinv;
  const Matrix64 linear = chi_from_superoperator(s);
  return {project_physical(linear), linear};
}

}  // namespace

PauliBasis PauliBasis::three_qubit() {
  const auto p = single_paulis();
  PauliBasis b;
  b.ops.reserve(64);
  for (int a = 0; a < 4; ++a)
    for (int m = 0; m < 4; ++m)
      for (int c = 0; c < 4; ++c) b.ops.push_back(kron3(p[a], p[m], p[c]));
  return b;
}

const PauliBasis& pauli_basis() {
  static const PauliBasis b = PauliBasis::three_qubit();
  return b;
}

std::vector<Matrix8> input_state_set() {
  const double r = 1.0 / std::sqrt(2.0);
  const std::array<Eigen::Vector2cd, 4> single{Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1),
                                               Eigen::Vector2cd(r, r), Eigen::Vector2cd(r, Complex(0, -r))};
  std::vector<Matrix8> out;
  out.reserve(64);
  for (const auto& a : single)
    for (const auto& b : single)
      for (const auto& c : single) {
        Eigen::Matrix<Complex, 8, 1> v;
        for (int k = 0; k < 8; ++k) v(k) = a(k >> 2) * b((k >> 1) & 1) * c(k & 1);
        out.push_back(v * v.adjoint());
      }
  return out;
}

std::vector<Matrix> input_state_set(const DressedBasis& basis) {
  const Matrix v = basis.computational_vectors();
  if (v.cols() != 8) throw ArgumentError("input_state_set: needs three qubits");
  std::vector<Matrix> out;
  for (const auto& rho : input_state_set()) out.push_back(v * rho * v.adjoint());
  return out;
}

ChiMatrix reconstruct_chi(const std::vector<Matrix8>& inputs, const std::vector<Matrix8>& outputs) {
  if (inputs.size() != outputs.size()) throw ArgumentError("reconstruct_chi: input/output count mismatch");
  return reconstruct(make_design(inputs), outputs);
}

ChiMatrix ideal_chi(const Matrix8& u) {
  if (!(u.adjoint() * u).isIdentity(1e-8)) throw ArgumentError("ideal_chi: matrix is not unitary");
  Eigen::VectorXcd c(64);
  const auto& ops = pauli_basis().ops;
  for (int n = 0; n < 64; ++n) c(n) = (ops[n].adjoint() * u).trace() / 8.0;
  Matrix chi = c * c.adjoint();
  return {chi, chi};
}

double process_fidelity(const ChiMatrix& chi, const ChiMatrix& chi_ideal) {
  if (chi.chi.rows() != 64 || chi_ideal.chi.rows() != 64 || chi.chi.cols() != 64 || chi_ideal.chi.cols() != 64)
    throw ArgumentError("process_fidelity: chi matrices must both be 64 x 64 in the Pauli basis");
  const double f = (chi_ideal.chi * chi.chi).trace().real();
  return std::clamp(f, 0.0, 1.0);
}

std::vector<Matrix8> apply_unitary_channel(const Matrix8& u, const std::vector<Matrix8>& inputs) {
  std::vector<Matrix8> out;
  out.reserve(inputs.size());
  for (const auto& rho : inputs) out.push_back(u * rho * u.adjoint());
  return out;
}

QptResult qpt_run(const DeviceParams& params, double amp_mhz, double sigma_ns, const CalibrationResult& calibration,
                  const DecoherenceSpec& dec, const QptOptions& options) {
  if (params.qubits() != 3) throw ArgumentError("qpt_run: needs three qubits");
  if (dec.qubits() != 3) throw ArgumentError("qpt_run: decoherence spec must cover three qubits");
  dec.validate();
  const DressedBasis basis = frame_dressed_basis(params, Frame::Rotating);
  const Matrix v = basis.computational_vectors();
  const PulseSpec pulse = calibration.pulse(amp_mhz, sigma_ns);
  const auto h = build_rotating_hamiltonian(params, params.space(), pulse);
  const auto inputs8 = input_state_set();

  QptResult res;
  std::vector<Matrix8> raw_out;
  raw_out.reserve(inputs8.size());
  if (dec.trivial() && options.unitary_shortcut) {
    const Matrix u = propagator(h, pulse.duration_ns, options.integrator, v);  // full x 8
    for (const auto& rho : inputs8) {
      const Matrix full = u * rho * u.adjoint();
      raw_out.push_back(v.adjoint() * full * v);
    }
  } else {
    const auto rho0 = input_state_set(basis);
    const auto finals = lindblad_propagate_batch(h, rho0, dec, pulse.duration_ns, options.integrator, &res.stats);
    for (const auto& rho : finals) raw_out.push_back(v.adjoint() * rho * v);
  }
  for (const auto& rho : raw_out) {
    res.leakage.push_back(std::max(0.0, 1.0 - rho.trace().real()));
    res.max_leakage = std::max(res.max_leakage, res.leakage.back());
  }

  const InputDesign design = make_design(inputs8);
  const ChiMatrix target = ideal_chi(ideal_gate());
  auto evaluate = [&](const PhaseCorrection& c, ChiMatrix* chi_out) {
    const GateMatrix d = u_phase(c);
    ChiMatrix chi = reconstruct(design, apply_unitary_channel(d, raw_out));
    const double f = process_fidelity(chi, target);
    if (chi_out) *chi_out = std::move(chi);
    return f;
  };
  res.correction = calibration.correction;
  res.fidelity_initial = evaluate(res.correction, &res.chi);
  res.fidelity = res.fidelity_initial;
  if (options.refine_phases) {
    const auto& c0 = calibration.correction;
    auto make = [&](const std::vector<double>& x) {
      return PhaseCorrection{x[0], x[1], x[2], x[3], x[4], c0.phi_drive};
    };
    NelderMeadOptions nm;
    nm.initial_step = 0.02;
    nm.x_tolerance = 1e-7;
    nm.f_tolerance = 1e-12;
    nm.max_evaluations = options.refine_evaluations;
    const auto r = nelder_mead([&](const std::vector<double>& x) { return -evaluate(make(x), nullptr); },
                               {c0.theta_ab, c0.theta_bc, c0.phi_a, c0.phi_b, c0.phi_c}, nm);
    if (-r.value > res.fidelity) {
      res.correction = make(r.x).wrapped();
      res.fidelity = evaluate(res.correction, &res.chi);
    }
  }
  return res;
}

}  // namespace transim
