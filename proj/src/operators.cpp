#include "transim/operators.hpp"

#include <sstream>

namespace transim {

HilbertSpace::HilbertSpace(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw ArgumentError("HilbertSpace: at least one subsystem required");
  for (int d : dims_) {
    if (d < 2) throw ArgumentError("HilbertSpace: every subsystem needs dimension >= 2");
    size_ *= d;
  }
}

int HilbertSpace::dim(int subsystem) const {
  if (subsystem < 0 || subsystem >= subsystems()) {
    std::ostringstream os;
    os << "subsystem index " << subsystem << " out of range [0, " << subsystems() << ")";
    throw ArgumentError(os.str());
  }
  return dims_[subsystem];
}

int HilbertSpace::index(std::span<const int> levels) const {
  if (static_cast<int>(levels.size()) != subsystems())
    throw ArgumentError("HilbertSpace::index: level count does not match subsystem count");
  int idx = 0;
  for (int q = 0; q < subsystems(); ++q) {
    if (levels[q] < 0 || levels[q] >= dims_[q]) throw ArgumentError("HilbertSpace::index: level out of range");
    idx = idx * dims_[q] + levels[q];
  }
  return idx;
}

std::vector<int> HilbertSpace::levels(int index) const {
  if (index < 0 || index >= size_) throw ArgumentError("HilbertSpace::levels: index out of range");
  std::vector<int> out(dims_.size());
  for (int q = subsystems() - 1; q >= 0; --q) {
    out[q] = index % dims_[q];
    index /= dims_[q];
  }
  return out;
}

Operator::Operator(HilbertSpace s, Matrix m) : space(std::move(s)), matrix(std::move(m)) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != space.size())
    throw ArgumentError("Operator: matrix shape does not match space dimension");
}

bool Operator::hermitian() const { return is_hermitian(matrix); }

Operator embed(const HilbertSpace& space, std::span<const Matrix> factors) {
  if (static_cast<int>(factors.size()) != space.subsystems())
    throw ArgumentError("embed: need exactly one operator per subsystem");
  for (int q = 0; q < space.subsystems(); ++q) {
    if (factors[q].rows() != space.dim(q) || factors[q].cols() != space.dim(q)) {
      std::ostringstream os;
      os << "embed: factor " << q << " is " << factors[q].rows() << "x" << factors[q].cols()
         << " but subsystem dimension is " << space.dim(q);
      throw ArgumentError(os.str());
    }
  }
  return {space, kron_all<double>(factors)};
}

Operator embed_single(const HilbertSpace& space, int subsystem, const Matrix& op) {
  std::vector<Matrix> factors;
  for (int q = 0; q < space.subsystems(); ++q)
    factors.push_back(q == subsystem ? op : Matrix::Identity(space.dim(q), space.dim(q)));
  space.dim(subsystem);  // range check
  return embed(space, factors);
}

Operator annihilation(const HilbertSpace& space, int subsystem) {
  return embed_single(space, subsystem, lowering<double>(space.dim(subsystem)));
}

Operator creation(const HilbertSpace& space, int subsystem) { return annihilation(space, subsystem).adjoint(); }

Operator number(const HilbertSpace& space, int subsystem) {
  const int d = space.dim(subsystem);
  Matrix n = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return embed_single(space, subsystem, n);
}

Operator identity(const HilbertSpace& space) { return {space, Matrix::Identity(space.size(), space.size())}; }

HermitianEigen eig_hermitian(const Matrix& m) {
  if (!is_hermitian(m)) throw ContractViolation("eig_hermitian: input matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("eig_hermitian: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

HermitianEigen eig_hermitian(const Operator& op) { return eig_hermitian(op.matrix); }

Matrix unitary_exponential(const HermitianEigen& eig, double t) {
  const Vector phases = (eig.values * (-t)).unaryExpr([](double x) { return std::polar(1.0, x); }).eval();
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace transim
