#include "kahler/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kahler/errors.hpp"

namespace kahler {

double max_abs(const ComplexMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double hermitian_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw LinalgError("hermitian check on a non-square matrix");
  return max_abs(a - a.adjoint());
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  ComplexMatrix h = 0.5 * (a + a.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = h(i, i).real();
  return h;
}

namespace {

void require_hermitian(const ComplexMatrix& a) {
  const double defect = hermitian_defect(a);
  if (!(defect <= kHermitianTolerance * std::max(1.0, max_abs(a))))
    throw LinalgError("matrix is not Hermitian (defect " + std::to_string(defect) + ")");
}

double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace

HermitianEigen herm_eig_decompose(const ComplexMatrix& input) {
  require_hermitian(input);
  const Eigen::Index n = input.rows();
  ComplexMatrix a = hermitian_part(input);
  ComplexMatrix v = ComplexMatrix::Identity(n, n);
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());

  for (int sweep = 0; sweep < 64 && off_diagonal_norm(a) > 1e-15 * scale; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        // Phase e^{-i phi} on q makes the pivot real, then a real rotation
        // annihilates it.
        const complex phase = std::conj(apq) / mag;
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        Eigen::Matrix2cd u;
        u << c, s, -s * phase, c * phase;

        ComplexMatrix cols(n, 2);
        cols << a.col(p), a.col(q);
        cols = cols * u;
        a.col(p) = cols.col(0);
        a.col(q) = cols.col(1);

        ComplexMatrix rows(2, n);
        rows << a.row(p), a.row(q);
        rows = u.adjoint() * rows;
        a.row(p) = rows.row(0);
        a.row(q) = rows.row(1);
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();

        ComplexMatrix vcols(n, 2);
        vcols << v.col(p), v.col(q);
        vcols = vcols * u;
        v.col(p) = vcols.col(0);
        v.col(q) = vcols.col(1);
      }
    }
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigen out{RealVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

RealVector herm_eig(const ComplexMatrix& a) { return herm_eig_decompose(a).values; }

ComplexMatrix herm_inverse(const ComplexMatrix& a) {
  const RealVector values = herm_eig(a);
  if (values.size() > 0 && !(values(0) > kDefinitenessFloor))
    throw LinalgError("matrix is not positive definite (min eigenvalue " +
                      std::to_string(values(0)) + ")");
  const ComplexMatrix h = hermitian_part(a);
  Eigen::LLT<ComplexMatrix> llt(h);
  if (llt.info() != Eigen::Success) throw LinalgError("Cholesky factorization failed");
  return hermitian_part(llt.solve(ComplexMatrix::Identity(a.rows(), a.cols())));
}

ComplexMatrix constant_part(const JetMatrix& a) {
  return a.unaryExpr([](const Jet& x) { return x.value(); });
}

JetMatrix to_jets(const ComplexMatrix& a) {
  return a.unaryExpr([](const complex& x) { return Jet(x); });
}

JetMatrix conj_transpose(const JetMatrix& a) {
  JetMatrix out(a.cols(), a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(j, i) = conj(a(i, j));
  return out;
}

JetMatrix d_holo(const JetMatrix& a, int c) {
  return a.unaryExpr([c](const Jet& x) { return d_holo(x, c); });
}

JetMatrix d_antiholo(const JetMatrix& a, int c) {
  return a.unaryExpr([c](const Jet& x) { return d_antiholo(x, c); });
}

JetMatrix truncate(const JetMatrix& a, int degree) {
  return a.unaryExpr([degree](const Jet& x) { return truncate(x, degree); });
}

JetMatrix inverse(const JetMatrix& a) {
  if (a.rows() != a.cols()) throw LinalgError("inverse of a non-square matrix");
  const ComplexMatrix a0 = constant_part(a);
  Eigen::FullPivLU<ComplexMatrix> lu(a0);
  if (!lu.isInvertible()) throw LinalgError("singular matrix in jet inverse");
  const JetMatrix a0_inv = to_jets(lu.inverse());

  int degree = 0;
  for (const Jet& x : a.reshaped()) degree = std::max(degree, x.degree());

  JetMatrix nilpotent = a;
  for (Jet& x : nilpotent.reshaped())
    if (x.has_layout()) x.coeffs()[0] = 0.0;
    else x = Jet();
  const JetMatrix step = -(a0_inv * nilpotent);

  JetMatrix term = a0_inv;
  JetMatrix sum = a0_inv;
  for (int k = 1; k <= degree; ++k) {
    term = step * term;
    sum += term;
  }
  return sum;
}

Jet determinant(const JetMatrix& input) {
  if (input.rows() != input.cols()) throw LinalgError("determinant of a non-square matrix");
  JetMatrix a = input;
  const Eigen::Index n = a.rows();
  Jet det(1.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Jet pivot = a(k, k);
    if (pivot.value() == complex{}) throw LinalgError("zero pivot in jet determinant");
    det *= pivot;
    const Jet inv = reciprocal(pivot);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const Jet factor = a(i, k) * inv;
      for (Eigen::Index j = k + 1; j < n; ++j) a(i, j) -= factor * a(k, j);
    }
  }
  return det;
}

}  // namespace kahler
