#pragma once

// Curvature of a Hermitian bundle (E, G) over (M, g) and of the Kähler
// metric Ω = π*ω + √-1 ∂∂̄𝒢 it induces on the total space, where
// 𝒢(z, v) = G_{ij̄}(z) v^i v̄^j.
//
// Conventions used throughout:
//   R_{ij̄αβ̄} = -∂_α∂_β̄ G_{ij̄} + G^{kl̄} ∂_α G_{il̄} ∂_β̄ G_{kj̄}
//   G_{il̄} G^{l̄k} = δ_i^k, so with B = G^-1 (G B = I) G^{l̄k} = B(l, k)
//   total-space coordinates (z^1..z^n, v^1..v^r), horizontal before vertical
//   a (1,1)-form √-1 F_{CD̄} dx^C ∧ dx̄^D is stored as the matrix F(C, D)
//   with the √-1 carried separately.
//
// Curvature components are stored as curvature[c * form_dim + d](a, b) for
// the bundle-valued form R_{ab̄cd̄} dx^c ∧ dx̄^d.

#include <optional>
#include <utility>
#include <vector>

#include "kahler/expr.hpp"
#include "kahler/linalg.hpp"
#include "kahler/model.hpp"

namespace kahler {

/// R_{ij̄αβ̄} as R[α * n + β](i, j).
using ChernTensor = std::vector<ComplexMatrix>;

struct CurvatureForm {
  int form_dim = 0;
  int bundle_dim = 0;
  std::vector<ComplexMatrix> comps;

  const ComplexMatrix& at(int c, int d) const { return comps[c * form_dim + d]; }
  ComplexMatrix& at(int c, int d) { return comps[c * form_dim + d]; }
};

struct FrameReport {
  PointState at;
  ChernTensor R;
  ComplexMatrix g;
  ComplexMatrix Psi;      // n x n
  ComplexMatrix Omega_h;  // n x n, g + Psi
  ComplexMatrix Omega_v;  // r x r, G
  /// connection(α, i) = v^k ∂_α G_{kl̄} G^{l̄i}; δv^i = dv^i + connection(α, i) dz^α.
  ComplexMatrix connection;
  bool omega_h_positive = false;
};

struct CurvatureBlocks {
  /// ⟨R^Ω(∂/∂v^i), ∂/∂v^j⟩ over the horizontal forms dz^α ∧ dz̄^σ.
  CurvatureForm vv;
  /// ⟨R^Ω(δ/δz^α), δ/δz^β⟩ over every frame form direction.
  CurvatureForm hh;
};

struct NormIdentity {
  double norm_sq = 0.0;             // G_i G_j̄ G^{j̄i}
  double norm_sq_coordinate = 0.0;  // ∂𝒢 measured with the coordinate inverse of Ω
  double G_value = 0.0;
};

struct TautologicalReport {
  ComplexMatrix Psi;
  std::optional<ComplexMatrix> M;  // ΨΩ_h^-1Ψ - Ψ; absent when Ω_h is singular
  double lambda_max = 0.0;
  double psi_min_eigenvalue = 0.0;
  /// v ≠ 0 and Ψ positive definite: the hypotheses under which λ_max < 0.
  bool strict_hypothesis = false;
};

struct RicciPair {
  /// Tr R^Ω in coordinates, from the brute-force curvature of Ω.
  ComplexMatrix trace;
  /// -∂∂̄ log(det G · det Ω_h), the same quantity through the log-determinant.
  ComplexMatrix log_det;
  /// +∂∂̄ log(det G · det Ω_h).
  ComplexMatrix ddbar_log_det;
};

struct PrimitiveReport {
  double exactness_residual = 0.0;
  double beta_norm = 0.0;         // ‖π*β‖_Ω
  double beta_norm_base_sq = 0.0;  // ‖β‖²_g
  double pG_norm = 0.0;           // ‖∂𝒢‖_Ω
  double G_value = 0.0;
};

struct GriffithsWitness {
  ComplexVector v;
  ComplexVector xi;
  double value = 0.0;
};

struct GriffithsResult {
  GriffithsClass classification = GriffithsClass::Indefinite;
  double max_abs_curvature = 0.0;
  std::optional<GriffithsWitness> negative_witness;
  std::optional<GriffithsWitness> positive_witness;
};

struct NehariBound {
  double radius = 0.0;
  double sup_bound = 0.0;
  double area = 0.0;
  bool chain_exact = false;  // sup_bound² · area == radius
};

ChernTensor chern_curvature(const ModelBundle& m, const ComplexVector& z);
GriffithsResult griffiths_classify(const ModelBundle& m, const ComplexVector& z, int samples,
                                   std::uint64_t seed = 42);

FrameReport induced_metric(const ModelBundle& m, const PointState& p);

/// (coordinate Hessian of 𝒢, frame form Ψ ⊕ G pulled back to coordinates).
std::pair<ComplexMatrix, ComplexMatrix> ddbar_G_two_ways(const ModelBundle& m,
                                                         const PointState& p);
NormIdentity pG_norm(const ModelBundle& m, const PointState& p);

/// Brute-force curvature of Ω in the frame {δ/δz^α, ∂/∂v^i}.
CurvatureForm full_curvature(const ModelBundle& m, const PointState& p);
CurvatureBlocks curvature_blocks_closed_form(const ModelBundle& m, const PointState& p);
TautologicalReport tautological_curvature(const ModelBundle& m, const PointState& p);

RicciPair ricci_two_ways(const ModelBundle& m, const PointState& p);
/// (∂∂̄-coefficients of ι*Ric^Ω, 2 ∂∂̄ log det g); needs fiber_is_base.
std::pair<ComplexMatrix, ComplexMatrix> zero_section_ricci_identity(const ModelBundle& m,
                                                                    const ComplexVector& z);

PrimitiveReport primitive_check(const ModelBundle& m, const PointState& p);

/// (three-term formula, Ω evaluated on T = u^α ∂/∂z^α + ẇ^i ∂/∂v^i).
std::pair<double, double> tangent_norm_two_ways(const ModelBundle& m, const PointState& p,
                                                const ComplexVector& u,
                                                const ComplexVector& w_dot);

/// f'''/f' - 3/2 (f''/f')² for f in z1.
complex schwarzian(const dsl::Expr& f, complex z);

NehariBound nehari_l2_radius(int genus);

// Frame helpers ---------------------------------------------------------------

/// Columns are δ/δz^α then ∂/∂v^i written in coordinates.
ComplexMatrix frame_matrix(const ComplexMatrix& connection);
/// F_frame = Pᵀ F P̄ for a (1,1)-form given in coordinates.
ComplexMatrix to_frame(const ComplexMatrix& form, const ComplexMatrix& P);
ComplexMatrix from_frame(const ComplexMatrix& form, const ComplexMatrix& P);

}  // namespace kahler
