#pragma once

#include <Eigen/Dense>

#include "kahler/jet.hpp"

namespace kahler {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using ComplexMatrix = Matrix<complex>;
using ComplexVector = Vector<complex>;
using RealVector = Eigen::VectorXd;
using JetMatrix = Matrix<Jet>;
using JetVector = Vector<Jet>;

/// Absolute tolerance on |A - A*| accepted by the Hermitian routines,
/// scaled by max(1, max|A_ij|).
inline constexpr double kHermitianTolerance = 1e-12;
/// Smallest eigenvalue herm_inverse accepts.
inline constexpr double kDefinitenessFloor = 1e-12;

double max_abs(const ComplexMatrix& a);
double hermitian_defect(const ComplexMatrix& a);
/// (A + A*) / 2; diagonal imaginary parts become exactly zero.
ComplexMatrix hermitian_part(const ComplexMatrix& a);

struct HermitianEigen {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns, unitary
};

/// Cyclic complex Jacobi. Throws LinalgError on non-Hermitian input.
HermitianEigen herm_eig_decompose(const ComplexMatrix& a);
RealVector herm_eig(const ComplexMatrix& a);

/// Inverse of a Hermitian positive definite matrix. The result B satisfies
/// A * B = I, so with A(i, l) = G_{i l̄} the entry B(l, k) is G^{l̄ k}.
ComplexMatrix herm_inverse(const ComplexMatrix& a);

// Jet-valued matrices -------------------------------------------------------

ComplexMatrix constant_part(const JetMatrix& a);
JetMatrix to_jets(const ComplexMatrix& a);
JetMatrix conj_transpose(const JetMatrix& a);
JetMatrix d_holo(const JetMatrix& a, int c);
JetMatrix d_antiholo(const JetMatrix& a, int c);
JetMatrix truncate(const JetMatrix& a, int degree);

/// Inverse through the terminating Neumann series around the constant part:
/// (A0 + N)^-1 = sum_k (-A0^-1 N)^k A0^-1. A0 must be invertible.
JetMatrix inverse(const JetMatrix& a);
/// Gaussian elimination without pivoting; fine for positive definite input.
Jet determinant(const JetMatrix& a);

}  // namespace kahler
