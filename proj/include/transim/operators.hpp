#pragma once

// Dense complex linear-algebra kernel: truncated oscillator ladders, tensor
// embedding in A (most significant) x B x C order, Hermitian eigensolver.

#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "transim/errors.hpp"

namespace transim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Ordinary frequency in GHz -> angular frequency in rad/ns.
constexpr double angular_from_ghz(double f_ghz) { return kTwoPi * f_ghz; }
/// Ordinary frequency in MHz -> angular frequency in rad/ns.
constexpr double angular_from_mhz(double f_mhz) { return kTwoPi * f_mhz * 1e-3; }
constexpr double ghz_from_angular(double w) { return w / kTwoPi; }
constexpr double mhz_from_angular(double w) { return w / kTwoPi * 1e3; }

/// Product space of truncated oscillators, subsystem 0 most significant.
class HilbertSpace {
 public:
  explicit HilbertSpace(std::vector<int> dims);

  int subsystems() const { return static_cast<int>(dims_.size()); }
  int dim(int subsystem) const;
  int size() const { return size_; }
  const std::vector<int>& dims() const { return dims_; }

  /// Flat basis index of the product state |n_0 n_1 ...>.
  int index(std::span<const int> levels) const;
  std::vector<int> levels(int index) const;

  friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

 private:
  std::vector<int> dims_;
  int size_ = 1;
};

/// A dense operator tagged with the space it acts on.
struct Operator {
  HilbertSpace space;
  Matrix matrix;

  Operator(HilbertSpace s, Matrix m);

  int size() const { return static_cast<int>(matrix.rows()); }
  Operator adjoint() const { return {space, matrix.adjoint()}; }
  bool hermitian() const;
};

/// max|M - M^dagger| < 1e-12 * max|M| (an exactly zero matrix is Hermitian).
template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() < rel_tol * scale;
}

/// Single-factor truncated lowering operator, <n-1|a|n> = sqrt(n).
template <typename Scalar = double>
ComplexMatrix<Scalar> lowering(int dim) {
  if (dim < 2) throw ArgumentError("lowering: dimension must be >= 2");
  ComplexMatrix<Scalar> a = ComplexMatrix<Scalar>::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<Scalar>(n));
  return a;
}

/// Kronecker product of a list of square factors, first factor most significant.
template <typename Scalar = double>
ComplexMatrix<Scalar> kron_all(std::span<const ComplexMatrix<Scalar>> factors) {
  ComplexMatrix<Scalar> out = ComplexMatrix<Scalar>::Identity(1, 1);
  for (const auto& f : factors) {
    ComplexMatrix<Scalar> next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
    out = std::move(next);
  }
  return out;
}

/// Tensor product of one operator per subsystem.
Operator embed(const HilbertSpace& space, std::span<const Matrix> factors);

/// `op` acting on one subsystem, identity elsewhere.
Operator embed_single(const HilbertSpace& space, int subsystem, const Matrix& op);

Operator annihilation(const HilbertSpace& space, int subsystem);
Operator creation(const HilbertSpace& space, int subsystem);
Operator number(const HilbertSpace& space, int subsystem);
Operator identity(const HilbertSpace& space);

struct HermitianEigen {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns
};

/// Throws ContractViolation for non-Hermitian input.
HermitianEigen eig_hermitian(const Operator& op);
HermitianEigen eig_hermitian(const Matrix& m);

/// exp(-i H t) for Hermitian H via its eigendecomposition.
Matrix unitary_exponential(const HermitianEigen& eig, double t);

}  // namespace transim
