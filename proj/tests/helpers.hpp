#pragma once

#include <random>

#include <Eigen/Dense>

#include "transim/operators.hpp"

namespace testing_util {

inline transim::Matrix haar_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  transim::Matrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<transim::Matrix> qr(z);
  transim::Matrix q = qr.householderQ();
  const transim::Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < n; ++k) q.col(k) *= std::polar(1.0, std::arg(r(k, k)));
  return q;
}

inline transim::Matrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  transim::Matrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = {g(rng), g(rng)};
  return (z + z.adjoint()) / 2.0;
}

inline double max_abs(const transim::Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_util
