#pragma once

#include <random>

#include "dpgmg/lac.hpp"

namespace dpgmg::testing {

inline Mat seeded_mat(int rows, int cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = Cplx(d(gen), d(gen));
  return m;
}

inline Vec seeded_vec(int n, unsigned seed) { return seeded_mat(n, 1, seed).col(0); }

/// A^H A / n + I: Hermitian positive definite with modest conditioning.
inline Mat seeded_hpd(int n, unsigned seed) {
  const Mat a = seeded_mat(n, n, seed);
  Mat h = a.adjoint() * a / double(n) + Mat::Identity(n, n);
  return Mat(0.5 * (h + h.adjoint()));
}

inline double rel_err(const Mat& got, const Mat& want) {
  const double scale = want.norm();
  return scale > 0 ? (got - want).norm() / scale : (got - want).norm();
}

}  // namespace dpgmg::testing
