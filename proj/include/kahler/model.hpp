#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "kahler/expr.hpp"
#include "kahler/linalg.hpp"

namespace kahler {

enum class GriffithsClass { Negative, Positive, Indefinite, Flat };

std::string_view to_string(GriffithsClass c);
std::optional<GriffithsClass> griffiths_class_from_string(std::string_view s);

/// A disk per base coordinate plus a fiber ball ||v|| <= v_radius.
struct Domain {
  std::vector<complex> z_center;
  std::vector<double> z_radius;
  double v_radius = 1.0;
};

/// A point (z; v) of the total space. The tautological vector at this point
/// is v^i d/dv^i, so it is carried implicitly by `v`.
struct PointState {
  ComplexVector z;
  ComplexVector v;
};

bool contains(const Domain& domain, const PointState& p);

/// Evaluators receive the jets of z_1..z_n (one complex coordinate each) and
/// return jets of the metric data at that point.
using MatrixEvaluator = std::function<JetMatrix(std::span<const Jet> z)>;
using VectorEvaluator = std::function<JetVector(std::span<const Jet> z)>;
using ScalarEvaluator = std::function<Jet(std::span<const Jet> z)>;

struct Potential {
  ScalarEvaluator psi;
  double k = 1.0;
};

struct ModelBundle {
  std::string name;
  int n = 0;
  int r = 0;
  MatrixEvaluator g;  // n x n, g_{αβ̄}
  MatrixEvaluator G;  // r x r, G_{ij̄}
  /// Coefficients β_ᾱ of the (0,1)-form β = β_ᾱ dz̄^α with dβ = ω.
  std::optional<VectorEvaluator> beta;
  std::optional<Potential> potential;
  Domain domain;
  GriffithsClass expected_griffiths = GriffithsClass::Indefinite;
  /// Fiber metric coincides with the base metric (tangent-bundle models).
  bool fiber_is_base = false;
};

/// Stable identifiers accepted by builtin().
std::vector<std::string> builtin_names();
ModelBundle builtin(std::string_view name);

/// Parsed form of a model-spec JSON document.
struct MetricSpec {
  std::string name = "spec";
  int n = 0;
  int r = 0;
  std::vector<std::vector<dsl::Expr>> g;
  std::vector<std::vector<dsl::Expr>> G;
  std::optional<std::vector<dsl::Expr>> beta;
  std::optional<dsl::Expr> psi;
  std::optional<double> k;
  Domain domain;
  std::optional<GriffithsClass> expected;
};

MetricSpec parse_metric_spec(const nlohmann::json& doc);
MetricSpec load_metric_spec(const std::string& path);
nlohmann::json to_json(const MetricSpec& spec);

/// Validates Hermitian symmetry and definiteness at seeded domain samples.
ModelBundle from_spec(const MetricSpec& spec);

/// Resolves a builtin name, or else reads a spec file at that path.
ModelBundle resolve_model(const std::string& name_or_path);

struct ModelInvariantReport {
  int points = 0;
  double max_hermitian_defect = 0.0;
  double min_eigenvalue_g = 0.0;
  double min_eigenvalue_G = 0.0;
  /// max |k ∂∂̄ψ - g|, zero when no potential is declared.
  double potential_gap = 0.0;
};

ModelInvariantReport check_model_invariants(const ModelBundle& m, int samples,
                                            std::uint64_t seed = 42);

// Sampling ------------------------------------------------------------------

/// mt19937_64 with hand-rolled distributions so draws are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  complex complex_normal();

 private:
  std::mt19937_64 engine_;
};

ComplexVector sample_base_point(const Domain& d, Rng& rng);
/// Fiber vector with ||v|| uniform in [lo, hi] and uniformly random direction.
ComplexVector sample_fiber_vector(int r, double lo, double hi, Rng& rng);
ComplexVector random_unit_vector(int dim, Rng& rng);

}  // namespace kahler
