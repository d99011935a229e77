#pragma once

#include <algorithm>
#include <cmath>

#include "kahler/linalg.hpp"
#include "kahler/model.hpp"

namespace test {

using kahler::complex;
using kahler::ComplexMatrix;
using kahler::ComplexVector;

inline complex random_complex(kahler::Rng& rng, double scale = 1.0) {
  return {rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
}

inline ComplexMatrix random_matrix(int rows, int cols, kahler::Rng& rng) {
  ComplexMatrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = random_complex(rng);
  return a;
}

inline ComplexMatrix random_hermitian(int n, kahler::Rng& rng) {
  const ComplexMatrix a = random_matrix(n, n, rng);
  ComplexMatrix h = (a + a.adjoint()) / 2.0;
  for (int i = 0; i < n; ++i) h(i, i) = h(i, i).real();
  return h;
}

inline ComplexMatrix random_positive(int n, kahler::Rng& rng) {
  const ComplexMatrix a = random_matrix(n, n, rng);
  ComplexMatrix h = a * a.adjoint() + ComplexMatrix::Identity(n, n) * 0.5;
  for (int i = 0; i < n; ++i) h(i, i) = h(i, i).real();
  return (h + h.adjoint()) / 2.0;
}

inline double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double rel_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return max_diff(a, b) / std::max(1.0, b.cwiseAbs().maxCoeff());
}

inline ComplexMatrix scalar(complex x) {
  ComplexMatrix m(1, 1);
  m(0, 0) = x;
  return m;
}

inline kahler::PointState point(std::initializer_list<complex> z,
                                std::initializer_list<complex> v) {
  kahler::PointState p;
  p.z = ComplexVector(static_cast<Eigen::Index>(z.size()));
  p.v = ComplexVector(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (complex x : z) p.z(i++) = x;
  i = 0;
  for (complex x : v) p.v(i++) = x;
  return p;
}

}  // namespace test
