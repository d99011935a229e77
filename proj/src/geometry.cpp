#include "kahler/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kahler {

namespace {

void require_shape(const ModelBundle& m, const PointState& p) {
  if (p.z.size() != m.n || p.v.size() != m.r)
    throw ModelError("point has dimensions (" + std::to_string(p.z.size()) + ", " +
                     std::to_string(p.v.size()) + "), model '" + m.name + "' needs (" +
                     std::to_string(m.n) + ", " + std::to_string(m.r) + ")");
}

ComplexMatrix invert(const ComplexMatrix& a) {
  Eigen::FullPivLU<ComplexMatrix> lu(a);
  if (!lu.isInvertible()) throw LinalgError("singular matrix");
  return lu.inverse();
}

/// Σ M(i, j) v^i v̄^j.
template <typename S>
S quadratic(const Matrix<S>& M, std::span<const S> v) {
  S out(0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out += M(i, j) * v[i] * conj(v[j]);
  return out;
}

complex quadratic(const ComplexMatrix& M, const ComplexVector& v) {
  return (v.transpose() * M * v.conjugate())(0, 0);
}

/// Jets of every total-space coordinate together with g, G and 𝒢.
struct Expansion {
  int n = 0;
  int r = 0;
  int dim = 0;
  std::vector<Jet> z;
  std::vector<Jet> v;
  JetMatrix g;
  JetMatrix G;
  Jet calG;
};

Expansion expand(const ModelBundle& m, const PointState& p, int degree) {
  require_shape(m, p);
  Expansion e;
  e.n = m.n;
  e.r = m.r;
  e.dim = m.n + m.r;
  const int num_vars = 2 * e.dim;
  for (int a = 0; a < m.n; ++a) e.z.push_back(complex_variable(a, p.z(a), num_vars, degree));
  for (int i = 0; i < m.r; ++i) e.v.push_back(complex_variable(m.n + i, p.v(i), num_vars, degree));
  e.g = m.g(e.z);
  e.G = m.G(e.z);
  e.calG = quadratic<Jet>(e.G, e.v);
  return e;
}

/// R_{ij̄αβ̄} as jets; degree drops by two.
std::vector<JetMatrix> curvature_jets(const JetMatrix& G, int n) {
  const JetMatrix Ginv = inverse(G);
  std::vector<JetMatrix> dG(n), dbG(n);
  for (int a = 0; a < n; ++a) {
    dG[a] = d_holo(G, a);
    dbG[a] = d_antiholo(G, a);
  }
  std::vector<JetMatrix> R(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      R[a * n + b] = -d_antiholo(dG[a], b) + dG[a] * Ginv * dbG[b];
  return R;
}

/// Ψ_{αβ̄} = -R_{ij̄αβ̄} v^i v̄^j.
template <typename S>
Matrix<S> psi_matrix(const std::vector<Matrix<S>>& R, std::span<const S> v, int n) {
  Matrix<S> psi(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) psi(a, b) = -quadratic<S>(R[a * n + b], v);
  return psi;
}

ComplexMatrix connection_matrix(const ComplexMatrix& G, const std::vector<ComplexMatrix>& dG,
                                const ComplexVector& v) {
  const ComplexMatrix Ginv = herm_inverse(G);
  const int n = static_cast<int>(dG.size());
  ComplexMatrix N(n, G.rows());
  for (int a = 0; a < n; ++a) N.row(a) = v.transpose() * dG[a] * Ginv;
  return N;
}

/// Coordinate Hessian ∂_C ∂_D̄ f at the expansion point.
ComplexMatrix hessian(const Jet& f, int dim) {
  ComplexMatrix h(dim, dim);
  for (int c = 0; c < dim; ++c) {
    const Jet fc = d_holo(f, c);
    for (int d = 0; d < dim; ++d) h(c, d) = d_antiholo(fc, d).value();
  }
  return h;
}

/// Chern curvature -∂_C∂_D̄H + ∂_C H H^-1 ∂_D̄H of a matrix-valued jet over
/// every coordinate direction.
std::vector<ComplexMatrix> matrix_curvature(const JetMatrix& H, int dim) {
  const ComplexMatrix Hinv = invert(constant_part(H));
  std::vector<JetMatrix> dH(dim);
  std::vector<ComplexMatrix> dHc(dim), dbHc(dim);
  for (int c = 0; c < dim; ++c) {
    dH[c] = d_holo(H, c);
    dHc[c] = constant_part(dH[c]);
    dbHc[c] = constant_part(d_antiholo(H, c));
  }
  std::vector<ComplexMatrix> out(dim * dim);
  for (int c = 0; c < dim; ++c)
    for (int d = 0; d < dim; ++d)
      out[c * dim + d] = -constant_part(d_antiholo(dH[c], d)) + dHc[c] * Hinv * dbHc[d];
  return out;
}

ComplexMatrix block_diagonal(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out = ComplexMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

std::vector<ComplexMatrix> constant_parts(const std::vector<JetMatrix>& js) {
  std::vector<ComplexMatrix> out;
  out.reserve(js.size());
  for (const auto& j : js) out.push_back(constant_part(j));
  return out;
}

/// Everything the curvature of Ω needs at one point, from degree-4 jets.
struct OmegaJets {
  Expansion e;
  std::vector<JetMatrix> R;  // degree 2
  JetMatrix Omega_h;         // degree 2
  ComplexMatrix P;
  ComplexMatrix G0;
  ComplexMatrix Omega_h0;
};

OmegaJets omega_jets(const ModelBundle& m, const PointState& p) {
  OmegaJets w;
  w.e = expand(m, p, 4);
  const int n = m.n;
  w.R = curvature_jets(w.e.G, n);
  w.Omega_h = truncate(w.e.g, 2) + psi_matrix<Jet>(w.R, w.e.v, n);
  w.G0 = constant_part(w.e.G);
  std::vector<ComplexMatrix> dG(n);
  for (int a = 0; a < n; ++a) dG[a] = constant_part(d_holo(w.e.G, a));
  w.P = frame_matrix(connection_matrix(w.G0, dG, p.v));
  w.Omega_h0 = constant_part(w.Omega_h);
  return w;
}

}  // namespace

// Frame helpers ---------------------------------------------------------------

ComplexMatrix frame_matrix(const ComplexMatrix& connection) {
  const Eigen::Index n = connection.rows();
  const Eigen::Index r = connection.cols();
  ComplexMatrix P = ComplexMatrix::Identity(n + r, n + r);
  P.bottomLeftCorner(r, n) = -connection.transpose();
  return P;
}

ComplexMatrix to_frame(const ComplexMatrix& form, const ComplexMatrix& P) {
  return P.transpose() * form * P.conjugate();
}

ComplexMatrix from_frame(const ComplexMatrix& form, const ComplexMatrix& P) {
  const ComplexMatrix Pinv = invert(P);
  return Pinv.transpose() * form * Pinv.conjugate();
}

// Bundle curvature --------------------------------------------------------------

ChernTensor chern_curvature(const ModelBundle& m, const ComplexVector& z) {
  if (z.size() != m.n) throw ModelError("base point has the wrong dimension");
  std::vector<Jet> zj;
  for (int a = 0; a < m.n; ++a) zj.push_back(complex_variable(a, z(a), 2 * m.n, 2));
  const JetMatrix G = m.G(zj);
  herm_inverse(constant_part(G));  // rejects a singular or indefinite fiber metric
  return constant_parts(curvature_jets(G, m.n));
}

GriffithsResult griffiths_classify(const ModelBundle& m, const ComplexVector& z, int samples,
                                   std::uint64_t seed) {
  const ChernTensor R = chern_curvature(m, z);
  GriffithsResult out;
  for (const auto& block : R) out.max_abs_curvature = std::max(out.max_abs_curvature, max_abs(block));
  if (out.max_abs_curvature < 1e-12) {
    out.classification = GriffithsClass::Flat;
    return out;
  }
  const double eps = 1e-12 * std::max(1.0, out.max_abs_curvature);
  Rng rng(seed);
  bool any_negative = false, any_positive = false, any_null = false;
  for (int s = 0; s < samples; ++s) {
    const ComplexVector v = random_unit_vector(m.r, rng);
    ComplexMatrix K(m.n, m.n);
    for (int a = 0; a < m.n; ++a)
      for (int b = 0; b < m.n; ++b) K(a, b) = quadratic(R[a * m.n + b], v);
    const HermitianEigen eig = herm_eig_decompose(hermitian_part(K));
    const double lo = eig.values(0);
    const double hi = eig.values(m.n - 1);
    if (lo < -eps && !out.negative_witness)
      out.negative_witness = GriffithsWitness{v, eig.vectors.col(0), lo};
    if (hi > eps && !out.positive_witness)
      out.positive_witness = GriffithsWitness{v, eig.vectors.col(m.n - 1), hi};
    any_negative |= lo < -eps;
    any_positive |= hi > eps;
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) any_null |= std::abs(eig.values(k)) <= eps;
  }
  if (any_negative && !any_positive && !any_null) out.classification = GriffithsClass::Negative;
  else if (any_positive && !any_negative && !any_null) out.classification = GriffithsClass::Positive;
  else out.classification = GriffithsClass::Indefinite;
  return out;
}

// Induced metric ------------------------------------------------------------------

FrameReport induced_metric(const ModelBundle& m, const PointState& p) {
  require_shape(m, p);
  FrameReport f;
  f.at = p;
  std::vector<Jet> zj;
  for (int a = 0; a < m.n; ++a) zj.push_back(complex_variable(a, p.z(a), 2 * m.n, 2));
  const JetMatrix G = m.G(zj);
  f.Omega_v = constant_part(G);
  f.g = constant_part(m.g(zj));
  f.R = constant_parts(curvature_jets(G, m.n));
  std::vector<ComplexMatrix> dG(m.n);
  for (int a = 0; a < m.n; ++a) dG[a] = constant_part(d_holo(G, a));
  f.connection = connection_matrix(f.Omega_v, dG, p.v);
  std::vector<complex> v(p.v.begin(), p.v.end());
  f.Psi = psi_matrix<complex>(f.R, v, m.n);
  f.Omega_h = f.g + f.Psi;
  const double defect = hermitian_defect(f.Omega_h);
  f.omega_h_positive = defect <= 1e-10 * std::max(1.0, max_abs(f.Omega_h)) &&
                       herm_eig(hermitian_part(f.Omega_h))(0) > kDefinitenessFloor;
  return f;
}

std::pair<ComplexMatrix, ComplexMatrix> ddbar_G_two_ways(const ModelBundle& m,
                                                         const PointState& p) {
  const Expansion e = expand(m, p, 2);
  ComplexMatrix brute = hessian(e.calG, e.dim);

  const FrameReport f = induced_metric(m, p);
  ComplexMatrix frame = block_diagonal(f.Psi, f.Omega_v);
  return {std::move(brute), from_frame(frame, frame_matrix(f.connection))};
}

NormIdentity pG_norm(const ModelBundle& m, const PointState& p) {
  const FrameReport f = induced_metric(m, p);
  NormIdentity out;
  out.G_value = quadratic(f.Omega_v, p.v).real();
  // ∂𝒢 = G_i δv^i with G_i = G_{ij̄} v̄^j.
  const ComplexVector Gi = f.Omega_v * p.v.conjugate();
  const ComplexMatrix Ginv = herm_inverse(f.Omega_v);
  out.norm_sq = (Gi.transpose() * Ginv.transpose() * Gi.conjugate())(0, 0).real();

  const Expansion e = expand(m, p, 2);
  ComplexVector theta(e.dim);
  for (int c = 0; c < e.dim; ++c) theta(c) = d_holo(e.calG, c).value();
  const ComplexMatrix H = block_diagonal(f.g, ComplexMatrix::Zero(m.r, m.r)) + hessian(e.calG, e.dim);
  out.norm_sq_coordinate = (theta.adjoint() * invert(H) * theta)(0, 0).real();
  return out;
}

// Curvature of Ω ----------------------------------------------------------------

namespace {

CurvatureForm full_curvature(const ModelBundle& m, const OmegaJets& w) {
  const int dim = w.e.dim;
  JetMatrix H(dim, dim);
  JetMatrix g = JetMatrix::Constant(dim, dim, Jet(0.0));
  g.topLeftCorner(m.n, m.n) = w.e.g;
  for (int c = 0; c < dim; ++c) {
    const Jet gc = d_holo(w.e.calG, c);
    for (int d = 0; d < dim; ++d) H(c, d) = g(c, d) + d_antiholo(gc, d);
  }
  const std::vector<ComplexMatrix> coord = matrix_curvature(H, dim);

  CurvatureForm out{dim, dim, std::vector<ComplexMatrix>(dim * dim)};
  const ComplexMatrix& P = w.P;
  for (int c = 0; c < dim; ++c)
    for (int d = 0; d < dim; ++d) {
      ComplexMatrix form = ComplexMatrix::Zero(dim, dim);
      for (int C = 0; C < dim; ++C)
        for (int D = 0; D < dim; ++D) {
          const complex weight = P(C, c) * std::conj(P(D, d));
          if (weight != complex{}) form += weight * coord[C * dim + D];
        }
      out.at(c, d) = to_frame(form, P);
    }
  return out;
}

}  // namespace

CurvatureForm full_curvature(const ModelBundle& m, const PointState& p) {
  return full_curvature(m, omega_jets(m, p));
}

CurvatureBlocks curvature_blocks_closed_form(const ModelBundle& m, const PointState& p) {
  const OmegaJets w = omega_jets(m, p);
  const int n = m.n, r = m.r, dim = w.e.dim;
  const std::vector<ComplexMatrix> R = constant_parts(w.R);
  const ComplexMatrix Oinv = invert(w.Omega_h0);
  const ComplexMatrix Ginv = herm_inverse(w.G0);

  // A[i](α, β) = R_{il̄αβ̄} v̄^l and B[j](γ, σ) = R_{kj̄γσ̄} v^k.
  std::vector<ComplexMatrix> A(r, ComplexMatrix(n, n)), B(r, ComplexMatrix(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const ComplexVector Av = R[a * n + b] * p.v.conjugate();
      const ComplexVector Bv = R[a * n + b].transpose() * p.v;
      for (int i = 0; i < r; ++i) {
        A[i](a, b) = Av(i);
        B[i](a, b) = Bv(i);
      }
    }

  CurvatureBlocks out;
  out.vv = CurvatureForm{n, r, std::vector<ComplexMatrix>(n * n, ComplexMatrix(r, r))};
  for (int a = 0; a < n; ++a)
    for (int s = 0; s < n; ++s)
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
          out.vv.at(a, s)(i, j) = (A[i].row(a) * Oinv * B[j].col(s))(0, 0) + R[a * n + s](i, j);

  // First term of the horizontal block: curvature of Ω_h(z, v) as a matrix
  // function on the total space, moved into the frame on its form indices.
  const std::vector<ComplexMatrix> coord = matrix_curvature(w.Omega_h, dim);
  out.hh = CurvatureForm{dim, n, std::vector<ComplexMatrix>(dim * dim)};
  for (int c = 0; c < dim; ++c)
    for (int d = 0; d < dim; ++d) {
      ComplexMatrix form = ComplexMatrix::Zero(n, n);
      for (int C = 0; C < dim; ++C)
        for (int D = 0; D < dim; ++D) {
          const complex weight = w.P(C, c) * std::conj(w.P(D, d));
          if (weight != complex{}) form += weight * coord[C * dim + D];
        }
      out.hh.at(c, d) = form;
    }
  // Second term: -R_{pl̄γβ̄} R_{kq̄ασ̄} v^k v̄^l G^{q̄p} on dz^γ ∧ dz̄^σ.
  for (int g = 0; g < n; ++g)
    for (int s = 0; s < n; ++s)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          complex sum = 0.0;
          for (int pp = 0; pp < r; ++pp)
            for (int q = 0; q < r; ++q) sum += A[pp](g, b) * B[q](a, s) * Ginv(q, pp);
          out.hh.at(g, s)(a, b) -= sum;
        }
  return out;
}

TautologicalReport tautological_curvature(const ModelBundle& m, const PointState& p) {
  const FrameReport f = induced_metric(m, p);
  TautologicalReport out;
  out.Psi = f.Psi;
  const ComplexMatrix psi = hermitian_part(f.Psi);
  out.psi_min_eigenvalue = herm_eig(psi)(0);
  out.strict_hypothesis = p.v.norm() > 0.0 && out.psi_min_eigenvalue > 1e-10;
  Eigen::FullPivLU<ComplexMatrix> lu(f.Omega_h);
  if (lu.isInvertible()) {
    ComplexMatrix M = f.Psi * lu.inverse() * f.Psi - f.Psi;
    out.lambda_max = herm_eig(hermitian_part(M))(m.n - 1);
    out.M = std::move(M);
  }
  return out;
}

// Ricci ---------------------------------------------------------------------------

RicciPair ricci_two_ways(const ModelBundle& m, const PointState& p) {
  const OmegaJets w = omega_jets(m, p);
  const CurvatureForm full = full_curvature(m, w);
  const int dim = w.e.dim;
  const ComplexMatrix Minv =
      block_diagonal(invert(w.Omega_h0), herm_inverse(w.G0));
  ComplexMatrix trace_frame(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int d = 0; d < dim; ++d) trace_frame(c, d) = (full.at(c, d) * Minv).trace();

  RicciPair out;
  out.trace = from_frame(trace_frame, w.P);
  const Jet L = log(determinant(w.e.G) * determinant(w.Omega_h));
  out.ddbar_log_det = hessian(L, dim);
  out.log_det = -out.ddbar_log_det;
  return out;
}

std::pair<ComplexMatrix, ComplexMatrix> zero_section_ricci_identity(const ModelBundle& m,
                                                                    const ComplexVector& z) {
  if (!m.fiber_is_base)
    throw ModelError("model '" + m.name + "' does not have G = g; the zero-section identity needs it");
  const PointState p{z, ComplexVector::Zero(m.r)};
  const RicciPair ric = ricci_two_ways(m, p);
  ComplexMatrix restricted = -ric.trace.topLeftCorner(m.n, m.n);

  std::vector<Jet> zj;
  for (int a = 0; a < m.n; ++a) zj.push_back(complex_variable(a, z(a), 2 * m.n, 2));
  const ComplexMatrix base = 2.0 * hessian(log(determinant(m.g(zj))), m.n);
  return {std::move(restricted), base};
}

// Primitive -------------------------------------------------------------------------

PrimitiveReport primitive_check(const ModelBundle& m, const PointState& p) {
  if (!m.beta) throw ModelError("model '" + m.name + "' declares no primitive β");
  const Expansion e = expand(m, p, 2);
  const int n = m.n, dim = e.dim;
  const JetVector beta = (*m.beta)(e.z);
  const complex I{0.0, 1.0};

  // θ = √-1 ∂̄𝒢 + π*β, a (0,1)-form: θ_D̄ for every coordinate D.
  std::vector<Jet> theta(dim);
  for (int d = 0; d < dim; ++d) {
    theta[d] = I * d_antiholo(e.calG, d);
    if (d < n) theta[d] += beta(d);
  }

  const FrameReport f = induced_metric(m, p);
  const ComplexMatrix P = frame_matrix(f.connection);
  const ComplexMatrix omega =
      from_frame(block_diagonal(f.Omega_h, f.Omega_v), P);

  PrimitiveReport out;
  for (int c = 0; c < dim; ++c)
    for (int d = 0; d < dim; ++d) {
      // (1,1) part of dθ against √-1 Ω, and the (0,2) part against zero.
      const complex mixed = d_holo(theta[d], c).value();
      const complex anti = d_antiholo(theta[d], c).value() - d_antiholo(theta[c], d).value();
      out.exactness_residual = std::max(
          {out.exactness_residual, std::abs(mixed - I * omega(c, d)), std::abs(anti)});
    }

  ComplexVector b(n);
  for (int a = 0; a < n; ++a) b(a) = beta(a).value();
  out.beta_norm_base_sq = (b.transpose() * herm_inverse(f.g) * b.conjugate())(0, 0).real();
  out.beta_norm = std::sqrt(std::max(0.0, (b.transpose() * invert(f.Omega_h) * b.conjugate())(0, 0).real()));
  out.G_value = e.calG.value().real();
  out.pG_norm = std::sqrt(std::max(0.0, pG_norm(m, p).norm_sq));
  return out;
}

// Tangent norm ------------------------------------------------------------------------

std::pair<double, double> tangent_norm_two_ways(const ModelBundle& m, const PointState& p,
                                                const ComplexVector& u,
                                                const ComplexVector& w_dot) {
  if (!m.potential) throw ModelError("model '" + m.name + "' declares no potential");
  if (u.size() != m.n || w_dot.size() != m.r) throw ModelError("tangent vector has the wrong shape");
  const Expansion e = expand(m, p, 2);
  const Jet psi = m.potential->psi(e.z);
  const double k = m.potential->k;
  const ComplexMatrix ddbar_psi = hessian(psi, e.dim).topLeftCorner(m.n, m.n);

  const FrameReport f = induced_metric(m, p);
  const ComplexVector lifted = f.connection.transpose() * u + w_dot;  // D_u w + ẇ
  const double curvature_term = quadratic(f.Psi, u).real();
  const double fiber_term = quadratic(f.Omega_v, lifted).real();
  const double base_term = k * quadratic(ddbar_psi, u).real();

  ComplexVector T(e.dim);
  T << u, w_dot;
  const Jet phi = e.calG + k * psi;
  const double direct = quadratic(hessian(phi, e.dim), T).real();
  return {curvature_term + fiber_term + base_term, direct};
}

// One-variable utilities --------------------------------------------------------------

complex schwarzian(const dsl::Expr& f, complex z) {
  if (dsl::max_variable(f) > 0) throw dsl::EvalError("Schwarzian takes a function of z1 only");
  const Jet zj = complex_variable(0, z, 2, 3);
  const Jet fj = dsl::evaluate<Jet>(f, std::span<const Jet>(&zj, 1));
  const Jet d1 = d_holo(fj, 0);
  const Jet d2 = d_holo(d1, 0);
  const Jet d3 = d_holo(d2, 0);
  const complex f1 = d1.value();
  if (std::abs(f1) == 0.0) throw DomainError("f' vanishes; the Schwarzian is undefined");
  const complex ratio = d2.value() / f1;
  return d3.value() / f1 - 1.5 * ratio * ratio;
}

NehariBound nehari_l2_radius(int genus) {
  if (genus < 2) throw DomainError("genus must be at least 2, got " + std::to_string(genus));
  NehariBound b;
  b.sup_bound = 1.5;
  b.area = 2.0 * std::numbers::pi * (2.0 * genus - 2.0);
  b.radius = 9.0 * std::numbers::pi * (genus - 1.0);
  b.chain_exact = b.sup_bound * b.sup_bound * b.area == b.radius;
  return b;
}

}  // namespace kahler
