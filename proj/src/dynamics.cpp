#include "transim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Sparse>

namespace transim {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// ---------------------------------------------------------------- decoherence

DecoherenceSpec DecoherenceSpec::none(int qubits) {
  const double inf = std::numeric_limits<double>::infinity();
  return {std::vector<double>(qubits, inf), std::vector<double>(qubits, inf)};
}

DecoherenceSpec DecoherenceSpec::uniform(int qubits, double t1_us, double t2star_us) {
  return {std::vector<double>(qubits, t1_us), std::vector<double>(qubits, t2star_us)};
}

double DecoherenceSpec::gamma1(int q) const { return 1.0 / (t1_us.at(q) * 1e3); }

double DecoherenceSpec::gamma_phi(int q) const {
  return 1.0 / (t2star_us.at(q) * 1e3) - 0.5 / (t1_us.at(q) * 1e3);
}

bool DecoherenceSpec::trivial() const {
  for (int q = 0; q < qubits(); ++q)
    if (gamma1(q) != 0.0 || gamma_phi(q) != 0.0) return false;
  return true;
}

void DecoherenceSpec::validate() const {
  if (t1_us.size() != t2star_us.size()) throw ArgumentError("decoherence: t1 and t2star need one value per qubit");
  for (int q = 0; q < qubits(); ++q) {
    if (!(t1_us[q] > 0.0) || !(t2star_us[q] > 0.0)) throw ArgumentError("decoherence: times must be positive");
    if (gamma_phi(q) < -1e-15) throw ArgumentError("decoherence: T2* > 2 T1 gives a negative dephasing rate");
  }
}

std::vector<Operator> collapse_operators(const HilbertSpace& space, const DecoherenceSpec& dec) {
  dec.validate();
  if (dec.qubits() != space.subsystems()) throw ArgumentError("decoherence: qubit count does not match space");
  std::vector<Operator> out;
  for (int q = 0; q < space.subsystems(); ++q) {
    const int d = space.dim(q);
    const double g1 = dec.gamma1(q);
    const double gphi = std::max(0.0, dec.gamma_phi(q));
    if (g1 > 0.0) {
      Matrix l = Matrix::Zero(d, d);
      l(0, 1) = std::sqrt(g1);
      out.push_back(embed_single(space, q, l));
    }
    if (gphi > 0.0) {
      Matrix l = Matrix::Zero(d, d);
      l(0, 0) = std::sqrt(gphi / 2.0);
      l(1, 1) = -std::sqrt(gphi / 2.0);
      out.push_back(embed_single(space, q, l));
    }
  }
  return out;
}

namespace {

// ------------------------------------------------------------ interaction frame

// H(t) in the frame of the static diagonal: entries of the static off-diagonal part,
// every drive operator and its adjoint share one sparsity pattern.
class FrameHamiltonian {
 public:
  explicit FrameHamiltonian(const TimeDependentHamiltonian& h) : h_(h) {
    const Matrix& s = h.static_part.matrix;
    diag_ = s.diagonal().real();
    const int n = static_cast<int>(s.rows());
    Matrix pattern = s;
    pattern.diagonal().setZero();
    Matrix mask = pattern.cwiseAbs().cast<Complex>();
    for (const auto& d : h.drives) mask += (d.op.matrix.cwiseAbs() + d.op.matrix.adjoint().cwiseAbs()).cast<Complex>();
    std::vector<Eigen::Triplet<Complex>> trip;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::abs(mask(i, j)) > 0.0) trip.emplace_back(i, j, Complex(1.0));
    matrix_.resize(n, n);
    matrix_.setFromTriplets(trip.begin(), trip.end());
    matrix_.makeCompressed();
    const auto nnz = matrix_.nonZeros();
    static_.resize(nnz);
    row_.resize(nnz);
    col_.resize(nnz);
    phase_.resize(n);
    op_.assign(h.drives.size(), std::vector<Complex>(nnz));
    adj_.assign(h.drives.size(), std::vector<Complex>(nnz));
    for (int r = 0; r < n; ++r) {
      for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
        const auto k = &it.valueRef() - matrix_.valuePtr();
        const int c = static_cast<int>(it.col());
        static_[k] = r == c ? Complex(0.0) : s(r, c);
        row_[k] = r;
        col_[k] = c;
        for (std::size_t d = 0; d < h.drives.size(); ++d) {
          op_[d][k] = h.drives[d].op.matrix(r, c);
          adj_[d][k] = std::conj(h.drives[d].op.matrix(c, r));
        }
      }
    }
    envelopes_.resize(h.drives.size());
  }

  const RealVector& diagonal() const { return diag_; }

  // Fill with H_I at absolute time t, frame origin t0.
  const SparseMatrix& at(double t, double t0) {
    for (std::size_t d = 0; d < envelopes_.size(); ++d) envelopes_[d] = h_.drives[d].envelope(t);
    const double tau = t - t0;
    // e^{i (d_r - d_c) tau} factored per index: n phases instead of nnz
    for (Eigen::Index i = 0; i < diag_.size(); ++i) phase_[i] = std::polar(1.0, diag_(i) * tau);
    Complex* v = matrix_.valuePtr();
    const auto nnz = static_cast<std::size_t>(matrix_.nonZeros());
    for (std::size_t k = 0; k < nnz; ++k) {
      Complex x = static_[k];
      for (std::size_t d = 0; d < envelopes_.size(); ++d) x += envelopes_[d] * op_[d][k] + std::conj(envelopes_[d]) * adj_[d][k];
      v[k] = phase_[row_[k]] * x * std::conj(phase_[col_[k]]);
    }
    return matrix_;
  }

 private:
  const TimeDependentHamiltonian& h_;
  RealVector diag_;
  SparseMatrix matrix_;
  std::vector<Complex> static_;
  std::vector<int> row_, col_;
  std::vector<Complex> phase_;
  std::vector<std::vector<Complex>> op_, adj_;
  std::vector<Complex> envelopes_;
};

Vector frame_phases(const RealVector& diag, double tau) {
  return (diag * (-tau)).unaryExpr([](double x) { return std::polar(1.0, x); });
}

// ------------------------------------------------------------ Dormand-Prince 5(4)

struct DopriTableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1, const IntegratorOptions& o) {
  double worst = 0.0;
  const auto n = err.size();
  const Complex* e = err.data();
  const Complex* a = y0.data();
  const Complex* b = y1.data();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double scale = o.atol + o.rtol * std::max(std::abs(a[k]), std::abs(b[k]));
    worst = std::max(worst, std::abs(e[k]) / scale);
  }
  return worst;
}

// Integrates y' = f(t, y) from t0 to t1, calling emit(t, y) at each requested output time
// (ascending, within [t0, t1]) via dense output. Returns y(t1).
template <typename Rhs, typename Emit>
Matrix dopri5(Rhs&& f, double t0, double t1, Matrix y, const std::vector<double>& outputs, Emit&& emit,
              const IntegratorOptions& o, IntegratorStats& stats) {
  using T = DopriTableau;
  std::size_t next = 0;
  while (next < outputs.size() && outputs[next] <= t0) emit(outputs[next++], y);
  if (t1 <= t0) return y;

  Matrix k1(y.rows(), y.cols()), k2 = k1, k3 = k1, k4 = k1, k5 = k1, k6 = k1, k7 = k1, ytmp = k1, ynew = k1;
  f(t0, y, k1);
  ++stats.rhs_evaluations;

  // Initial step guess (Hairer & Wanner, II.4).
  double h;
  {
    const Matrix zero = Matrix::Zero(y.rows(), y.cols());
    const double d0 = error_norm(y, y, zero, o);
    const double d1 = error_norm(k1, y, zero, o);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t1 - t0);
    ytmp = y + h0 * k1;
    f(t0 + h0, ytmp, k2);
    ++stats.rhs_evaluations;
    const double d2 = error_norm(k2 - k1, y, zero, o) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min(100.0 * h0, h1);
  }
  if (o.max_step_ns > 0.0) h = std::min(h, o.max_step_ns);

  double t = t0;
  long steps = 0;
  while (t < t1) {
    if (++steps > o.max_steps) {
      std::ostringstream os;
      os << "integrator exceeded " << o.max_steps << " steps on [" << t0 << ", " << t1 << "] ns at t = " << t;
      throw NumericalError(os.str());
    }
    bool last = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    ytmp = y + h * T::a21 * k1;
    f(t + T::c2 * h, ytmp, k2);
    ytmp = y + h * (T::a31 * k1 + T::a32 * k2);
    f(t + T::c3 * h, ytmp, k3);
    ytmp = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
    f(t + T::c4 * h, ytmp, k4);
    ytmp = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
    f(t + T::c5 * h, ytmp, k5);
    ytmp = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
    f(t + h, ytmp, k6);
    ynew = y + h * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
    f(t + h, ynew, k7);
    stats.rhs_evaluations += 6;
    ytmp = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
    const double err = error_norm(ytmp, y, ynew, o);
    if (!std::isfinite(err)) {
      std::ostringstream os;
      os << "integrator produced a non-finite state near t = " << t << " ns";
      throw NumericalError(os.str());
    }
    if (err <= 1.0) {
      ++stats.accepted;
      const double tn = t + h;
      if (next < outputs.size() && outputs[next] <= tn) {
        const Matrix r2 = ynew - y;
        const Matrix r3 = h * k1 - r2;
        const Matrix r4 = r2 - h * k7 - r3;
        const Matrix r5 = h * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 + T::d7 * k7);
        while (next < outputs.size() && outputs[next] <= tn) {
          const double th = (outputs[next] - t) / h;
          const double th1 = 1.0 - th;
          if (th >= 1.0) {
            emit(outputs[next], ynew);
          } else {
            emit(outputs[next], y + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5))));
          }
          ++next;
        }
      }
      y.swap(ynew);
      k1.swap(k7);
      t = last ? t1 : tn;
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        std::ostringstream os;
        os << "integrator step size underflow at t = " << t << " ns on interval [" << t0 << ", " << t1 << "]";
        throw NumericalError(os.str());
      }
    }
    if (o.max_step_ns > 0.0) h = std::min(h, o.max_step_ns);
  }
  while (next < outputs.size()) emit(outputs[next++], y);
  return y;
}

void check_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw ArgumentError("time grid must be nonempty");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1])) throw ArgumentError("time grid must be strictly increasing");
}

struct Segment {
  double a, b;
  bool exact;
};

std::vector<Segment> segments(const TimeDependentHamiltonian& h, double t0, double t1, bool use_exact) {
  std::vector<Segment> out;
  double cur = t0;
  if (use_exact) {
    auto iv = h.constant_intervals;
    std::sort(iv.begin(), iv.end());
    for (const auto& [a, b] : iv) {
      const double lo = std::max(a, cur), hi = std::min(b, t1);
      if (hi <= lo) continue;
      if (lo > cur) out.push_back({cur, lo, false});
      out.push_back({lo, hi, true});
      cur = hi;
    }
  }
  if (cur < t1) out.push_back({cur, t1, false});
  return out;
}

}  // namespace

// ------------------------------------------------------------------ pure states

Trajectory propagate_state(const TimeDependentHamiltonian& h, const Matrix& psi0, const std::vector<double>& t_grid,
                           const IntegratorOptions& options) {
  check_grid(t_grid);
  const int n = h.space().size();
  if (psi0.rows() != n) throw ArgumentError("propagate_state: initial state dimension does not match Hamiltonian");
  for (Eigen::Index c = 0; c < psi0.cols(); ++c)
    if (std::abs(psi0.col(c).norm() - 1.0) > 1e-8) throw ArgumentError("propagate_state: initial state must be normalized");

  Trajectory traj;
  traj.times = t_grid;
  traj.states.resize(t_grid.size());
  FrameHamiltonian frame(h);
  const RealVector& diag = frame.diagonal();

  Matrix psi = psi0;
  std::size_t out = 0;
  const double t_end = t_grid.back();
  traj.states[out++] = psi;
  for (const auto& seg : segments(h, t_grid.front(), t_end, options.exact_constant_intervals)) {
    std::vector<double> outputs;
    while (out < t_grid.size() && t_grid[out] <= seg.b) outputs.push_back(t_grid[out++]);
    const std::size_t first = out - outputs.size();
    if (seg.exact) {
      ++traj.stats.exact_segments;
      const auto eig = eig_hermitian(h.at(0.5 * (seg.a + seg.b)));
      const Matrix coeffs = eig.vectors.adjoint() * psi;
      const auto evolve = [&](double dt) {
        const Vector ph = (eig.values * (-dt)).unaryExpr([](double x) { return std::polar(1.0, x); });
        return Matrix(eig.vectors * (ph.asDiagonal() * coeffs));
      };
      for (std::size_t k = 0; k < outputs.size(); ++k) traj.states[first + k] = evolve(outputs[k] - seg.a);
      psi = evolve(seg.b - seg.a);
      continue;
    }
    const double t0 = seg.a;
    Matrix scratch(psi.rows(), psi.cols());
    auto rhs = [&](double t, const Matrix& y, Matrix& dy) {
      dy.noalias() = frame.at(t, t0) * y;
      dy *= Complex(0.0, -1.0);
    };
    std::size_t k = 0;
    auto emit = [&](double t, const Matrix& y) {
      traj.states[first + k++] = frame_phases(diag, t - t0).asDiagonal() * y;
    };
    const Matrix phi = dopri5(rhs, t0, seg.b, psi, outputs, emit, options, traj.stats);
    psi = frame_phases(diag, seg.b - t0).asDiagonal() * phi;
  }
  return traj;
}

Matrix propagator(const TimeDependentHamiltonian& h, double duration_ns, const IntegratorOptions& options,
                  const Matrix& initial) {
  if (!(duration_ns > 0.0)) throw ArgumentError("propagator: duration must be positive");
  const int n = h.space().size();
  const Matrix start = initial.size() == 0 ? Matrix(Matrix::Identity(n, n)) : initial;
  auto traj = propagate_state(h, start, {0.0, duration_ns}, options);
  return std::move(traj.states.back());
}

// ------------------------------------------------------------------ Lindblad

namespace {

// The collapse operators are diagonal (dephasing) or lower one qubit 1 -> 0, so the
// dissipator reduces to an elementwise weight plus index gathers. Both commute with
// the bare-diagonal frame, so it is applied to the frame state unchanged.
class LindbladRhs {
 public:
  LindbladRhs(const TimeDependentHamiltonian& h, const DecoherenceSpec& dec) : frame_(h) {
    const HilbertSpace& space = h.space();
    dec.validate();
    if (dec.qubits() != space.subsystems()) throw ArgumentError("decoherence: qubit count does not match space");
    const int n = space.size();
    RealVector k = RealVector::Zero(n);
    std::vector<RealVector> signs;
    for (int q = 0; q < space.subsystems(); ++q) {
      const double g1 = dec.gamma1(q);
      const double gphi = std::max(0.0, dec.gamma_phi(q));
      if (g1 > 0.0) {
        std::vector<int> up(n, -1);
        for (int m = 0; m < n; ++m) {
          auto lv = space.levels(m);
          if (lv[q] == 1) k(m) += g1;
          if (lv[q] != 0) continue;
          lv[q] = 1;
          up[m] = space.index(lv);
        }
        raise_.push_back(std::move(up));
        rate_.push_back(g1);
      }
      if (gphi > 0.0) {
        RealVector s = RealVector::Zero(n);
        for (int m = 0; m < n; ++m) {
          const int l = space.levels(m)[q];
          if (l < 2) s(m) = (l == 0 ? 1.0 : -1.0) * std::sqrt(gphi / 2.0);
        }
        k += s.cwiseAbs2();
        signs.push_back(std::move(s));
      }
    }
    weight_ = -0.5 * (k.replicate(1, n) + k.transpose().replicate(n, 1));
    for (const auto& s : signs) weight_ += s * s.transpose();
    for (auto& up : raise_) {
      std::vector<std::pair<int, int>> pairs;
      for (int m = 0; m < n; ++m)
        if (up[m] >= 0) pairs.emplace_back(m, up[m]);
      gathers_.push_back(std::move(pairs));
    }
  }

  // Each block of `y` (n x n, stacked horizontally) is one density matrix in the frame.
  void operator()(double t, double t0, const Matrix& y, Matrix& dy) {
    const auto& hs = frame_.at(t, t0);
    const Eigen::Index n = y.rows();
    const Eigen::Index blocks = y.cols() / n;
    x_.noalias() = hs * y;
    for (Eigen::Index b = 0; b < blocks; ++b) {
      const auto xb = x_.middleCols(b * n, n);
      const auto yb = y.middleCols(b * n, n);
      auto out = dy.middleCols(b * n, n);
      out = Complex(0.0, -1.0) * (xb - xb.adjoint()) + weight_.cwiseProduct(yb);
      for (std::size_t j = 0; j < gathers_.size(); ++j) {
        const double r = rate_[j];
        for (const auto& [cn, sn] : gathers_[j])
          for (const auto& [cm, sm] : gathers_[j]) out(cm, cn) += r * yb(sm, sn);
      }
    }
  }

  const RealVector& diagonal() const { return frame_.diagonal(); }

 private:
  FrameHamiltonian frame_;
  Eigen::MatrixXd weight_;
  std::vector<std::vector<int>> raise_;
  std::vector<std::vector<std::pair<int, int>>> gathers_;
  std::vector<double> rate_;
  Matrix x_;
};

// Exact flow of the dissipator alone. Per qubit, coherences between levels k, l decay at
// a fixed rate and relaxation moves the |1><1| block of that qubit onto |0><0|; the
// maps for different qubits commute, so they are applied one after another.
class DissipatorFlow {
 public:
  DissipatorFlow(const HilbertSpace& space, const DecoherenceSpec& dec) : n_(space.size()) {
    dec.validate();
    if (dec.qubits() != space.subsystems()) throw ArgumentError("decoherence: qubit count does not match space");
    for (int q = 0; q < space.subsystems(); ++q) {
      const double g1 = dec.gamma1(q);
      const double gphi = std::max(0.0, dec.gamma_phi(q));
      if (g1 == 0.0 && gphi == 0.0) continue;
      QubitChannel ch;
      ch.gamma1 = g1;
      const auto s = [&](int l) { return l == 0 ? std::sqrt(gphi / 2.0) : l == 1 ? -std::sqrt(gphi / 2.0) : 0.0; };
      const auto kappa = [&](int l) { return l == 0 ? gphi / 2.0 : l == 1 ? g1 + gphi / 2.0 : 0.0; };
      std::vector<int> level(n_);
      for (int m = 0; m < n_; ++m) level[m] = space.levels(m)[q];
      ch.rate.resize(n_, n_);
      for (int c = 0; c < n_; ++c)
        for (int r = 0; r < n_; ++r)
          ch.rate(r, c) = s(level[r]) * s(level[c]) - 0.5 * (kappa(level[r]) + kappa(level[c]));
      for (int m = 0; m < n_; ++m) {
        if (level[m] != 0) continue;
        auto lv = space.levels(m);
        lv[q] = 1;
        ch.lowered.emplace_back(m, space.index(lv));
      }
      channels_.push_back(std::move(ch));
    }
  }

  bool trivial() const { return channels_.empty(); }

  // Applies the flow for time dt to every n x n block of y.
  void apply(Matrix& y, double dt) {
    if (channels_.empty() || dt == 0.0) return;
    const Eigen::Index blocks = y.cols() / n_;
    for (auto& ch : channels_) {
      if (ch.cached_dt != dt) {
        ch.factor = (ch.rate * dt).array().exp().matrix();
        ch.transfer = -std::expm1(-ch.gamma1 * dt);
        ch.cached_dt = dt;
      }
      for (Eigen::Index b = 0; b < blocks; ++b) {
        auto yb = y.middleCols(b * n_, n_);
        if (ch.transfer != 0.0)
          for (const auto& [cn, sn] : ch.lowered)
            for (const auto& [cm, sm] : ch.lowered) yb(cm, cn) += ch.transfer * yb(sm, sn);
        yb.array() *= ch.factor.array().cast<Complex>();
      }
    }
  }

 private:
  struct QubitChannel {
    double gamma1 = 0.0;
    Eigen::MatrixXd rate;
    std::vector<std::pair<int, int>> lowered;  // (index with level 0, same index with level 1)
    double cached_dt = -1.0;
    Eigen::MatrixXd factor;
    double transfer = 0.0;
  };
  int n_;
  std::vector<QubitChannel> channels_;
};

void check_density(const Matrix& rho, int n) {
  if (rho.rows() != n || rho.cols() != n) throw ArgumentError("lindblad: density matrix dimension mismatch");
  if (!is_hermitian(rho, 1e-10)) throw ArgumentError("lindblad: initial density matrix must be Hermitian");
  if (std::abs(rho.trace() - Complex(1.0)) > 1e-8) throw ArgumentError("lindblad: initial density matrix must have unit trace");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) throw ArgumentError("lindblad: initial density matrix must be positive semidefinite");
}

// U rho U^dag for every n x n block of y.
void conjugate_blocks(const Matrix& u, Matrix& y, Matrix& scratch) {
  const Eigen::Index n = u.rows();
  scratch.noalias() = u * y;
  const Matrix ud = u.adjoint();
  for (Eigen::Index b = 0; b < y.cols() / n; ++b) y.middleCols(b * n, n).noalias() = scratch.middleCols(b * n, n) * ud;
}

// Exact closed-system propagators over consecutive substeps [t_k, t_{k+1}].
class SubstepPropagators {
 public:
  SubstepPropagators(const TimeDependentHamiltonian& h, const IntegratorOptions& o, IntegratorStats& stats)
      : h_(h), o_(o), stats_(stats) {
    if (o.exact_constant_intervals)
      for (const auto& iv : h.constant_intervals) intervals_.push_back({iv.first, iv.second, {}, false});
  }

  Matrix operator()(double a, double b) {
    for (auto& iv : intervals_) {
      if (a >= iv.a - 1e-12 && b <= iv.b + 1e-12) {
        if (!iv.ready) {
          iv.eig = eig_hermitian(h_.at(0.5 * (iv.a + iv.b)));
          iv.ready = true;
        }
        ++stats_.exact_segments;
        return unitary_exponential(iv.eig, b - a);
      }
    }
    IntegratorOptions inner = o_;
    inner.exact_constant_intervals = false;
    const int n = h_.space().size();
    auto traj = propagate_state(h_, Matrix::Identity(n, n), {a, b}, inner);
    stats_.accepted += traj.stats.accepted;
    stats_.rejected += traj.stats.rejected;
    stats_.rhs_evaluations += traj.stats.rhs_evaluations;
    return std::move(traj.states.back());
  }

 private:
  struct Interval {
    double a, b;
    HermitianEigen eig;
    bool ready;
  };
  const TimeDependentHamiltonian& h_;
  IntegratorOptions o_;
  IntegratorStats& stats_;
  std::vector<Interval> intervals_;
};

// Substep boundaries: each grid interval split evenly, with constant-interval edges
// inserted so no substep straddles a change of regime.
std::vector<double> substep_grid(const TimeDependentHamiltonian& h, const std::vector<double>& grid, double step,
                                 bool use_exact) {
  std::vector<double> marks(grid.begin(), grid.end());
  if (use_exact)
    for (const auto& [a, b] : h.constant_intervals)
      for (double x : {a, b})
        if (x > grid.front() && x < grid.back()) marks.push_back(x);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
              marks.end());
  std::vector<double> out{marks.front()};
  for (std::size_t k = 1; k < marks.size(); ++k) {
    const double len = marks[k] - marks[k - 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
    for (int p = 1; p < pieces; ++p) out.push_back(marks[k - 1] + len * p / pieces);
    out.push_back(marks[k]);
  }
  return out;
}

// Evolves the horizontally stacked density matrices in y, emitting the batch at each grid time.
template <typename Emit>
void evolve_open(const TimeDependentHamiltonian& h, Matrix y, const DecoherenceSpec& dec,
                 const std::vector<double>& grid, const IntegratorOptions& o, IntegratorStats& stats, Emit&& emit) {
  const int n = h.space().size();
  if (o.lindblad_splitting) {
    if (!(o.lindblad_step_ns > 0.0)) throw ArgumentError("lindblad: splitting step must be positive");
    DissipatorFlow flow(h.space(), dec);
    SubstepPropagators props(h, o, stats);
    const auto steps = substep_grid(h, grid, o.lindblad_step_ns, o.exact_constant_intervals);
    Matrix scratch(n, y.cols());
    std::size_t next = 0;
    while (next < grid.size() && grid[next] <= steps.front()) emit(grid[next++], y);
    for (std::size_t k = 1; k < steps.size(); ++k) {
      const double dt = steps[k] - steps[k - 1];
      flow.apply(y, 0.5 * dt);
      conjugate_blocks(props(steps[k - 1], steps[k]), y, scratch);
      flow.apply(y, 0.5 * dt);
      ++stats.accepted;
      while (next < grid.size() && std::abs(grid[next] - steps[k]) < 1e-12) emit(grid[next++], y);
    }
    return;
  }
  LindbladRhs rhs(h, dec);
  const double t0 = grid.front();
  auto f = [&](double t, const Matrix& yy, Matrix& dy) { rhs(t, t0, yy, dy); };
  const RealVector& diag = rhs.diagonal();
  auto to_lab = [&](double t, const Matrix& yy) {
    const Vector ph = frame_phases(diag, t - t0);
    Matrix out(yy.rows(), yy.cols());
    for (Eigen::Index b = 0; b < yy.cols() / n; ++b)
      out.middleCols(b * n, n) = ph.asDiagonal() * yy.middleCols(b * n, n) * ph.conjugate().asDiagonal();
    emit(t, out);
  };
  dopri5(f, t0, grid.back(), std::move(y), grid, to_lab, o, stats);
}

}  // namespace

Trajectory lindblad_propagate(const TimeDependentHamiltonian& h, const Matrix& rho0, const DecoherenceSpec& dec,
                              const std::vector<double>& t_grid, const IntegratorOptions& options) {
  check_grid(t_grid);
  check_density(rho0, h.space().size());
  Trajectory traj;
  traj.times = t_grid;
  evolve_open(h, rho0, dec, t_grid, options, traj.stats,
              [&](double, const Matrix& y) { traj.states.push_back(y); });
  return traj;
}

std::vector<Matrix> lindblad_propagate_batch(const TimeDependentHamiltonian& h, const std::vector<Matrix>& rho0,
                                             const DecoherenceSpec& dec, double duration_ns,
                                             const IntegratorOptions& options, IntegratorStats* stats) {
  if (!(duration_ns > 0.0)) throw ArgumentError("lindblad: duration must be positive");
  const int n = h.space().size();
  const auto m = static_cast<Eigen::Index>(rho0.size());
  Matrix y(n, n * m);
  for (Eigen::Index b = 0; b < m; ++b) {
    check_density(rho0[b], n);
    y.middleCols(b * n, n) = rho0[b];
  }
  IntegratorStats local;
  std::vector<Matrix> out;
  evolve_open(h, std::move(y), dec, {0.0, duration_ns}, options, stats ? *stats : local,
              [&](double t, const Matrix& yy) {
                if (t < duration_ns) return;
                for (Eigen::Index b = 0; b < m; ++b) out.push_back(yy.middleCols(b * n, n));
              });
  return out;
}

}  // namespace transim
