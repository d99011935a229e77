#include "kahler/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace kahler {

std::string_view to_string(GriffithsClass c) {
  switch (c) {
    case GriffithsClass::Negative: return "negative";
    case GriffithsClass::Positive: return "positive";
    case GriffithsClass::Indefinite: return "indefinite";
    case GriffithsClass::Flat: return "flat";
  }
  return "indefinite";
}

std::optional<GriffithsClass> griffiths_class_from_string(std::string_view s) {
  for (auto c : {GriffithsClass::Negative, GriffithsClass::Positive, GriffithsClass::Indefinite,
                 GriffithsClass::Flat})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

bool contains(const Domain& domain, const PointState& p) {
  constexpr double slack = 1e-12;
  if (p.z.size() != static_cast<Eigen::Index>(domain.z_center.size())) return false;
  for (Eigen::Index a = 0; a < p.z.size(); ++a)
    if (std::abs(p.z(a) - domain.z_center[a]) > domain.z_radius[a] + slack) return false;
  return p.v.norm() <= domain.v_radius + slack;
}

// Sampling ------------------------------------------------------------------

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

complex Rng::complex_normal() {
  const double re = normal();
  return {re, normal()};
}

ComplexVector sample_base_point(const Domain& d, Rng& rng) {
  ComplexVector z(static_cast<Eigen::Index>(d.z_center.size()));
  for (std::size_t a = 0; a < d.z_center.size(); ++a) {
    const double rho = d.z_radius[a] * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    z(static_cast<Eigen::Index>(a)) = d.z_center[a] + std::polar(rho, theta);
  }
  return z;
}

ComplexVector random_unit_vector(int dim, Rng& rng) {
  ComplexVector v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = rng.complex_normal();
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

ComplexVector sample_fiber_vector(int r, double lo, double hi, Rng& rng) {
  const double mag = rng.uniform(lo, hi);
  return mag * random_unit_vector(r, rng);
}

// Builtins -------------------------------------------------------------------

namespace {

Jet abs2(const Jet& z) { return z * conj(z); }

const complex I{0.0, 1.0};

JetMatrix scalar_matrix(const Jet& x) {
  JetMatrix m(1, 1);
  m(0, 0) = x;
  return m;
}

JetVector scalar_vector(const Jet& x) {
  JetVector m(1);
  m(0) = x;
  return m;
}

Domain disk_domain(int n, complex center, double radius, double v_radius) {
  return {std::vector<complex>(n, center), std::vector<double>(n, radius), v_radius};
}

Jet poincare(const Jet& z) { return pow(1.0 - abs2(z), -2); }
Jet fubini_study(const Jet& z) { return pow(1.0 + abs2(z), -2); }

ModelBundle disk_tangent() {
  ModelBundle m;
  m.name = "disk_tangent";
  m.n = m.r = 1;
  m.g = m.G = [](std::span<const Jet> z) { return scalar_matrix(poincare(z[0])); };
  m.beta = [](std::span<const Jet> z) {
    return scalar_vector(I * z[0] / (1.0 - abs2(z[0])));
  };
  m.potential = Potential{[](std::span<const Jet> z) { return -log(1.0 - abs2(z[0])); }, 1.0};
  m.domain = disk_domain(1, 0.0, 0.8, 2.0);
  m.expected_griffiths = GriffithsClass::Negative;
  m.fiber_is_base = true;
  return m;
}

// -4 / (z - z̄)^2 = 1 / (Im z)^2.
ModelBundle halfplane_tangent() {
  ModelBundle m;
  m.name = "halfplane_tangent";
  m.n = m.r = 1;
  m.g = m.G = [](std::span<const Jet> z) {
    return scalar_matrix(-4.0 * pow(z[0] - conj(z[0]), -2));
  };
  m.beta = [](std::span<const Jet> z) { return scalar_vector(4.0 * I / (z[0] - conj(z[0]))); };
  m.potential = Potential{
      [](std::span<const Jet> z) { return -4.0 * log((z[0] - conj(z[0])) / (2.0 * I)); }, 1.0};
  // Disk of radius 1.25 about 1.75i: Im z stays in [0.5, 3].
  m.domain = disk_domain(1, complex{0.0, 1.75}, 1.25, 2.0);
  m.expected_griffiths = GriffithsClass::Negative;
  m.fiber_is_base = true;
  return m;
}

ModelBundle fubini_study_base(std::string name) {
  ModelBundle m;
  m.name = std::move(name);
  m.n = m.r = 1;
  m.g = [](std::span<const Jet> z) { return scalar_matrix(fubini_study(z[0])); };
  m.beta = [](std::span<const Jet> z) {
    return scalar_vector(I * z[0] / (1.0 + abs2(z[0])));
  };
  m.potential = Potential{[](std::span<const Jet> z) { return log(1.0 + abs2(z[0])); }, 1.0};
  return m;
}

ModelBundle taut_over_p1() {
  ModelBundle m = fubini_study_base("taut_over_p1");
  m.G = [](std::span<const Jet> z) { return scalar_matrix(1.0 + abs2(z[0])); };
  m.domain = disk_domain(1, 0.0, 2.0, 2.0);
  m.expected_griffiths = GriffithsClass::Negative;
  return m;
}

// Ω_h = (1+|z|²)^-3 (1 + |z|² - |v|²) stays positive for |v| <= 0.9.
ModelBundle o1_positive() {
  ModelBundle m = fubini_study_base("o1_positive");
  m.G = [](std::span<const Jet> z) { return scalar_matrix(pow(1.0 + abs2(z[0]), -1)); };
  m.domain = disk_domain(1, 0.0, 1.0, 0.9);
  m.expected_griffiths = GriffithsClass::Positive;
  return m;
}

ModelBundle product_rank2() {
  ModelBundle m;
  m.name = "product_rank2";
  m.n = m.r = 2;
  m.g = m.G = [](std::span<const Jet> z) {
    JetMatrix h(2, 2);
    h(0, 0) = poincare(z[0]);
    h(1, 1) = poincare(z[1]);
    h(0, 1) = h(1, 0) = Jet(0.0);
    return h;
  };
  m.beta = [](std::span<const Jet> z) {
    JetVector b(2);
    for (int a = 0; a < 2; ++a) b(a) = I * z[a] / (1.0 - abs2(z[a]));
    return b;
  };
  m.potential = Potential{
      [](std::span<const Jet> z) { return -log(1.0 - abs2(z[0])) - log(1.0 - abs2(z[1])); },
      1.0};
  m.domain = disk_domain(2, 0.0, 0.8, 2.0);
  m.expected_griffiths = GriffithsClass::Negative;
  m.fiber_is_base = true;
  return m;
}

ModelBundle flat() {
  ModelBundle m;
  m.name = "flat";
  m.n = m.r = 1;
  m.g = m.G = [](std::span<const Jet>) { return scalar_matrix(Jet(1.0)); };
  m.beta = [](std::span<const Jet> z) { return scalar_vector(I * z[0]); };
  m.potential = Potential{[](std::span<const Jet> z) { return abs2(z[0]); }, 1.0};
  m.domain = disk_domain(1, 0.0, 1.0, 2.0);
  m.expected_griffiths = GriffithsClass::Flat;
  m.fiber_is_base = true;
  return m;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"disk_tangent", "halfplane_tangent", "taut_over_p1",
          "product_rank2", "o1_positive", "flat"};
}

ModelBundle builtin(std::string_view name) {
  if (name == "disk_tangent") return disk_tangent();
  if (name == "halfplane_tangent") return halfplane_tangent();
  if (name == "taut_over_p1") return taut_over_p1();
  if (name == "product_rank2") return product_rank2();
  if (name == "o1_positive") return o1_positive();
  if (name == "flat") return flat();
  throw ModelError("unknown builtin model '" + std::string(name) + "'");
}

// Spec files ----------------------------------------------------------------

namespace {

dsl::Expr parse_entry(const nlohmann::json& j, const std::string& where) {
  if (!j.is_string()) throw ModelError(where + ": expected an expression string");
  try {
    return dsl::parse(j.get<std::string>());
  } catch (const dsl::ParseError& e) {
    throw ModelError(where + ": " + e.what());
  }
}

std::vector<std::vector<dsl::Expr>> parse_matrix(const nlohmann::json& j, int dim,
                                                 const std::string& key) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw ModelError("'" + key + "' must be a " + std::to_string(dim) + "x" +
                     std::to_string(dim) + " array of strings");
  std::vector<std::vector<dsl::Expr>> out(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != dim)
      throw ModelError("'" + key + "' row " + std::to_string(i) + " has the wrong length");
    for (int k = 0; k < dim; ++k)
      out[i].push_back(
          parse_entry(j[i][k], key + "[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
  }
  return out;
}

void require_variables(const dsl::Expr& e, int n, const std::string& where) {
  if (dsl::max_variable(e) >= n)
    throw ModelError(where + ": uses z" + std::to_string(dsl::max_variable(e) + 1) +
                     " but the base has dimension " + std::to_string(n));
}

template <typename T>
T required(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw ModelError(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

MetricSpec parse_metric_spec(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ModelError("model spec must be a JSON object");
  MetricSpec spec;
  if (doc.contains("name")) spec.name = required<std::string>(doc, "name");
  spec.n = required<int>(doc, "n");
  spec.r = required<int>(doc, "r");
  if (spec.n < 1 || spec.r < 1 || spec.n + spec.r > 4)
    throw ModelError("need n >= 1, r >= 1 and n + r <= 4");
  spec.g = parse_matrix(doc.at("g"), spec.n, "g");
  spec.G = parse_matrix(doc.contains("G") ? doc.at("G") : nlohmann::json(), spec.r, "G");
  for (int i = 0; i < spec.n; ++i)
    for (int k = 0; k < spec.n; ++k) require_variables(spec.g[i][k], spec.n, "g");
  for (int i = 0; i < spec.r; ++i)
    for (int k = 0; k < spec.r; ++k) require_variables(spec.G[i][k], spec.n, "G");

  if (doc.contains("beta") && !doc.at("beta").is_null()) {
    const auto& b = doc.at("beta");
    if (!b.is_array() || static_cast<int>(b.size()) != spec.n)
      throw ModelError("'beta' must be an array of n strings");
    std::vector<dsl::Expr> beta;
    for (int a = 0; a < spec.n; ++a) {
      beta.push_back(parse_entry(b[a], "beta[" + std::to_string(a) + "]"));
      require_variables(beta.back(), spec.n, "beta");
    }
    spec.beta = std::move(beta);
  }
  if (doc.contains("psi") && !doc.at("psi").is_null()) {
    spec.psi = parse_entry(doc.at("psi"), "psi");
    require_variables(*spec.psi, spec.n, "psi");
  }
  if (doc.contains("k") && !doc.at("k").is_null()) {
    spec.k = required<double>(doc, "k");
    if (!(*spec.k > 0.0)) throw ModelError("'k' must be positive");
  }
  if (doc.contains("expected") && !doc.at("expected").is_null()) {
    spec.expected = griffiths_class_from_string(required<std::string>(doc, "expected"));
    if (!spec.expected) throw ModelError("'expected' must be negative|positive|indefinite|flat");
  }

  const auto& dom = doc.contains("domain") ? doc.at("domain") : nlohmann::json();
  if (!dom.is_object()) throw ModelError("missing 'domain' object");
  const auto centers = required<std::vector<std::array<double, 2>>>(dom, "z_center");
  const auto radii = required<std::vector<double>>(dom, "z_radius");
  if (static_cast<int>(centers.size()) != spec.n || static_cast<int>(radii.size()) != spec.n)
    throw ModelError("domain needs one center and one radius per base coordinate");
  for (const auto& c : centers) spec.domain.z_center.emplace_back(c[0], c[1]);
  spec.domain.z_radius = radii;
  spec.domain.v_radius = required<double>(dom, "v_radius");
  for (double rad : radii)
    if (!(rad > 0.0)) throw ModelError("domain radii must be positive");
  if (!(spec.domain.v_radius > 0.0)) throw ModelError("v_radius must be positive");
  return spec;
}

MetricSpec load_metric_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model spec '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("'" + path + "' is not valid JSON: " + e.what());
  }
  return parse_metric_spec(doc);
}

nlohmann::json to_json(const MetricSpec& spec) {
  auto matrix = [](const std::vector<std::vector<dsl::Expr>>& m) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : m) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& e : row) r.push_back(dsl::to_string(e));
      out.push_back(r);
    }
    return out;
  };
  nlohmann::json doc;
  doc["name"] = spec.name;
  doc["n"] = spec.n;
  doc["r"] = spec.r;
  doc["g"] = matrix(spec.g);
  doc["G"] = matrix(spec.G);
  if (spec.beta) {
    doc["beta"] = nlohmann::json::array();
    for (const auto& e : *spec.beta) doc["beta"].push_back(dsl::to_string(e));
  } else {
    doc["beta"] = nullptr;
  }
  doc["psi"] = spec.psi ? nlohmann::json(dsl::to_string(*spec.psi)) : nlohmann::json(nullptr);
  doc["k"] = spec.k ? nlohmann::json(*spec.k) : nlohmann::json(nullptr);
  if (spec.expected) doc["expected"] = std::string(to_string(*spec.expected));
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : spec.domain.z_center) centers.push_back({c.real(), c.imag()});
  doc["domain"] = {{"z_center", centers},
                   {"z_radius", spec.domain.z_radius},
                   {"v_radius", spec.domain.v_radius}};
  return doc;
}

namespace {

MatrixEvaluator matrix_evaluator(std::vector<std::vector<dsl::Expr>> entries) {
  return [entries = std::move(entries)](std::span<const Jet> z) {
    const auto dim = static_cast<Eigen::Index>(entries.size());
    JetMatrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index k = 0; k < dim; ++k) m(i, k) = dsl::evaluate<Jet>(entries[i][k], z);
    return m;
  };
}

ComplexMatrix evaluate_at(const MatrixEvaluator& f, const ComplexVector& z) {
  std::vector<Jet> zj(z.begin(), z.end());
  return constant_part(f(zj));
}

bool same_entries(const MetricSpec& spec) {
  if (spec.n != spec.r) return false;
  for (int i = 0; i < spec.n; ++i)
    for (int k = 0; k < spec.n; ++k)
      if (!dsl::structurally_equal(spec.g[i][k], spec.G[i][k])) return false;
  return true;
}

}  // namespace

ModelBundle from_spec(const MetricSpec& spec) {
  ModelBundle m;
  m.name = spec.name;
  m.n = spec.n;
  m.r = spec.r;
  m.g = matrix_evaluator(spec.g);
  m.G = matrix_evaluator(spec.G);
  if (spec.beta) {
    m.beta = [beta = *spec.beta](std::span<const Jet> z) {
      JetVector b(static_cast<Eigen::Index>(beta.size()));
      for (std::size_t a = 0; a < beta.size(); ++a)
        b(static_cast<Eigen::Index>(a)) = dsl::evaluate<Jet>(beta[a], z);
      return b;
    };
  }
  if (spec.psi) {
    m.potential = Potential{[psi = *spec.psi](std::span<const Jet> z) {
                              return dsl::evaluate<Jet>(psi, z);
                            },
                            spec.k.value_or(1.0)};
  }
  m.domain = spec.domain;
  m.expected_griffiths = spec.expected.value_or(GriffithsClass::Indefinite);
  m.fiber_is_base = same_entries(spec);

  Rng rng(42);
  for (int s = 0; s < 21; ++s) {
    const ComplexVector z = s == 0 ? Eigen::Map<const ComplexVector>(spec.domain.z_center.data(),
                                                                     spec.n)
                                         .eval()
                                   : sample_base_point(spec.domain, rng);
    for (const auto* which : {"g", "G"}) {
      ComplexMatrix value;
      try {
        value = evaluate_at(which[0] == 'g' ? m.g : m.G, z);
      } catch (const std::exception& e) {
        throw ModelError(std::string(which) + ": evaluation failed inside the domain: " + e.what());
      }
      if (!value.allFinite())
        throw ModelError(std::string(which) + ": non-finite value inside the domain");
      const double defect = hermitian_defect(value);
      if (defect > 1e-10 * std::max(1.0, max_abs(value)))
        throw ModelError(std::string(which) + " is not Hermitian (defect " +
                         std::to_string(defect) + ")");
      if (!(herm_eig(hermitian_part(value))(0) > 1e-10))
        throw ModelError(std::string(which) + " is not positive definite inside the domain");
    }
  }
  return m;
}

ModelBundle resolve_model(const std::string& name_or_path) {
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end())
    return builtin(name_or_path);
  if (!std::ifstream(name_or_path))
    throw ModelError("unknown model '" + name_or_path + "': not a builtin and no such spec file");
  return from_spec(load_metric_spec(name_or_path));
}

ModelInvariantReport check_model_invariants(const ModelBundle& m, int samples,
                                            std::uint64_t seed) {
  ModelInvariantReport report;
  report.min_eigenvalue_g = report.min_eigenvalue_G = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  const int num_vars = 2 * m.n;
  for (int s = 0; s < samples; ++s) {
    const ComplexVector z = sample_base_point(m.domain, rng);
    std::vector<Jet> zj;
    for (int a = 0; a < m.n; ++a) zj.push_back(complex_variable(a, z(a), num_vars, 2));
    const ComplexMatrix g = constant_part(m.g(zj));
    const ComplexMatrix G = constant_part(m.G(zj));
    report.max_hermitian_defect =
        std::max({report.max_hermitian_defect, hermitian_defect(g), hermitian_defect(G)});
    report.min_eigenvalue_g = std::min(report.min_eigenvalue_g, herm_eig(hermitian_part(g))(0));
    report.min_eigenvalue_G = std::min(report.min_eigenvalue_G, herm_eig(hermitian_part(G))(0));
    if (m.potential) {
      const Jet psi = m.potential->psi(zj);
      for (int a = 0; a < m.n; ++a)
        for (int b = 0; b < m.n; ++b) {
          const complex ddbar = d_antiholo(d_holo(psi, a), b).value();
          report.potential_gap =
              std::max(report.potential_gap, std::abs(m.potential->k * ddbar - g(a, b)));
        }
    }
    ++report.points;
  }
  return report;
}

}  // namespace kahler
