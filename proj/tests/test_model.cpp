#include <cmath>
#include <string>

#include "doctest.h"

#include "kahler/errors.hpp"
#include "kahler/model.hpp"
#include "support.hpp"

using kahler::complex;
using kahler::ComplexMatrix;
using kahler::ComplexVector;
using kahler::Jet;
using nlohmann::json;

namespace {

std::string model_file(const std::string& name) {
  return std::string(KAHLER_MODELS_DIR) + "/" + name + ".json";
}

std::vector<Jet> constants(const ComplexVector& z) { return {z.begin(), z.end()}; }

json minimal_spec() {
  return json::parse(R"json({
    "n": 1, "r": 1,
    "g": [["(1 - z1*conj(z1))^-2"]],
    "G": [["1 + z1*conj(z1)"]],
    "domain": {"z_center": [[0, 0]], "z_radius": [0.5], "v_radius": 1}
  })json");
}

std::string model_error(const json& doc) {
  try {
    kahler::from_spec(kahler::parse_metric_spec(doc));
  } catch (const kahler::ModelError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("builtin values at simple points") {
  const ComplexVector origin = ComplexVector::Zero(1);
  CHECK(test::max_diff(kahler::constant_part(kahler::builtin("disk_tangent").G(constants(origin))),
                       test::scalar(1.0)) == 0.0);

  ComplexVector one(1);
  one << 1.0;
  CHECK(std::abs(kahler::constant_part(kahler::builtin("taut_over_p1").G(constants(one)))(0, 0) -
                 2.0) < 1e-15);
  CHECK(std::abs(kahler::constant_part(kahler::builtin("o1_positive").G(constants(one)))(0, 0) -
                 0.5) < 1e-15);

  ComplexVector h(1);
  h << complex(0.0, 2.0);
  CHECK(std::abs(kahler::constant_part(kahler::builtin("halfplane_tangent").g(constants(h)))(0, 0) -
                 0.25) < 1e-15);
}

TEST_CASE("catalog names resolve and unknown names fail") {
  for (const auto& name : kahler::builtin_names()) CHECK(kahler::builtin(name).name == name);
  CHECK(kahler::builtin_names().size() == 6);
  CHECK_THROWS_AS(kahler::builtin("nope"), kahler::ModelError);
  CHECK_THROWS_WITH_AS(kahler::resolve_model("/no/such/file.json"),
                       doctest::Contains("not a builtin"), kahler::ModelError);
}

TEST_CASE("every builtin passes its own invariants") {
  for (const auto& name : kahler::builtin_names()) {
    INFO(name);
    const auto report = kahler::check_model_invariants(kahler::builtin(name), 50);
    CHECK(report.points == 50);
    CHECK(report.max_hermitian_defect < 1e-12);
    CHECK(report.min_eigenvalue_g > 1e-10);
    CHECK(report.min_eigenvalue_G > 1e-10);
    CHECK(report.potential_gap < 1e-10);
  }
}

TEST_CASE("spec files reproduce the builtins") {
  for (const auto& name : kahler::builtin_names()) {
    INFO(name);
    const auto builtin = kahler::builtin(name);
    const auto spec = kahler::resolve_model(model_file(name));
    CHECK(spec.n == builtin.n);
    CHECK(spec.r == builtin.r);
    CHECK(spec.fiber_is_base == builtin.fiber_is_base);
    CHECK(spec.expected_griffiths == builtin.expected_griffiths);
    REQUIRE(spec.beta.has_value());
    REQUIRE(spec.potential.has_value());

    kahler::Rng rng(3);
    for (int s = 0; s < 20; ++s) {
      const ComplexVector z = kahler::sample_base_point(builtin.domain, rng);
      std::vector<Jet> jets;
      for (int c = 0; c < builtin.n; ++c)
        jets.push_back(kahler::complex_variable(c, z(c), 2 * builtin.n, 2));
      CHECK(test::rel_diff(kahler::constant_part(spec.g(jets)),
                           kahler::constant_part(builtin.g(jets))) < 1e-12);
      CHECK(test::rel_diff(kahler::constant_part(spec.G(jets)),
                           kahler::constant_part(builtin.G(jets))) < 1e-12);
      const kahler::JetVector bs = (*spec.beta)(jets), bb = (*builtin.beta)(jets);
      for (int a = 0; a < builtin.n; ++a) {
        for (std::size_t k = 0; k < bs(a).coeffs().size(); ++k)
          CHECK(std::abs(bs(a).coeffs()[k] - bb(a).coeffs()[k]) < 1e-12);
      }
      const Jet ps = spec.potential->psi(jets), pb = builtin.potential->psi(jets);
      for (std::size_t k = 1; k < ps.coeffs().size(); ++k)
        CHECK(std::abs(ps.coeffs()[k] - pb.coeffs()[k]) < 1e-12);
    }
  }
}

TEST_CASE("spec round-trips through JSON") {
  const auto spec = kahler::load_metric_spec(model_file("product_rank2"));
  const auto again = kahler::parse_metric_spec(kahler::to_json(spec));
  CHECK(kahler::to_json(again) == kahler::to_json(spec));
  CHECK(again.n == 2);
  CHECK(again.domain.z_radius == spec.domain.z_radius);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) CHECK(kahler::dsl::structurally_equal(again.g[i][k], spec.g[i][k]));
}

TEST_CASE("from_spec accepts a minimal document") {
  const auto m = kahler::from_spec(kahler::parse_metric_spec(minimal_spec()));
  CHECK(m.name == "spec");
  CHECK_FALSE(m.fiber_is_base);
  CHECK_FALSE(m.beta.has_value());
  CHECK_FALSE(m.potential.has_value());
  CHECK(m.expected_griffiths == kahler::GriffithsClass::Indefinite);
}

TEST_CASE("spec validation errors") {
  json doc = minimal_spec();
  doc["G"] = json::array({json::array({"2 + i*z1"})});
  CHECK(model_error(doc).find("Hermitian") != std::string::npos);

  doc["G"] = json::array({json::array({"-1"})});
  CHECK(model_error(doc).find("positive definite") != std::string::npos);

  doc["G"] = json::array({json::array({"1 +* z1"})});
  CHECK(model_error(doc).find("G[0][0]") != std::string::npos);

  doc["G"] = json::array({json::array({"z2"})});
  CHECK(model_error(doc).find("z2") != std::string::npos);

  doc = minimal_spec();
  doc.erase("n");
  CHECK(model_error(doc).find("'n'") != std::string::npos);

  doc = minimal_spec();
  doc["n"] = 3;
  doc["r"] = 2;
  CHECK(model_error(doc).find("n + r") != std::string::npos);

  doc = minimal_spec();
  doc["k"] = -1;
  CHECK(model_error(doc).find("'k'") != std::string::npos);

  doc = minimal_spec();
  doc["domain"]["z_radius"] = json::array({0.5, 0.5});
  CHECK_FALSE(model_error(doc).empty());

  doc = minimal_spec();
  doc["expected"] = "sideways";
  CHECK_FALSE(model_error(doc).empty());

  // Positive only for |z| < 0.71; the sampled disk goes further out.
  doc = minimal_spec();
  doc["domain"]["z_radius"] = json::array({1.0});
  doc["G"] = json::array({json::array({"1 - 2*z1*conj(z1)"})});
  CHECK_FALSE(model_error(doc).empty());
}

TEST_CASE("disk primitive has g-norm |z|") {
  const auto m = kahler::builtin("disk_tangent");
  kahler::Rng rng(5);
  for (int s = 0; s < 50; ++s) {
    const ComplexVector z = kahler::sample_base_point(m.domain, rng);
    const auto jets = constants(z);
    const complex g = kahler::constant_part(m.g(jets))(0, 0);
    const complex b = (*m.beta)(jets)(0).value();
    const double norm_sq = std::norm(b) / g.real();
    CHECK(std::abs(norm_sq - std::norm(z(0))) < 1e-12);
    CHECK(norm_sq <= 0.64 + 1e-12);
  }
}

TEST_CASE("sampling stays inside the domain and is reproducible") {
  for (const auto& name : kahler::builtin_names()) {
    const auto m = kahler::builtin(name);
    kahler::Rng a(99), b(99);
    for (int s = 0; s < 200; ++s) {
      const ComplexVector z = kahler::sample_base_point(m.domain, a);
      CHECK(z == kahler::sample_base_point(m.domain, b));
      const ComplexVector v = kahler::sample_fiber_vector(m.r, 0.1, m.domain.v_radius, a);
      kahler::sample_fiber_vector(m.r, 0.1, m.domain.v_radius, b);
      CHECK(v.norm() >= 0.1 - 1e-15);
      CHECK(v.norm() <= m.domain.v_radius + 1e-15);
      CHECK(kahler::contains(m.domain, {z, v}));
    }
  }
  kahler::Rng rng(1);
  for (int s = 0; s < 100; ++s) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(std::abs(kahler::random_unit_vector(3, rng).norm() - 1.0) < 1e-14);
  }
}

TEST_CASE("mt19937_64 stream is the standard one") {
  // Reference value of the 10000th output for the default seed.
  std::mt19937_64 engine;
  engine.discard(9999);
  CHECK(engine() == 9981545732273789042ULL);
  kahler::Rng rng(5489);
  for (int i = 0; i < 9999; ++i) rng.next();
  CHECK(rng.next() == 9981545732273789042ULL);
}

TEST_CASE("Griffiths class names") {
  using kahler::GriffithsClass;
  for (auto c : {GriffithsClass::Negative, GriffithsClass::Positive, GriffithsClass::Indefinite,
                 GriffithsClass::Flat})
    CHECK(kahler::griffiths_class_from_string(kahler::to_string(c)) == c);
  CHECK_FALSE(kahler::griffiths_class_from_string("mixed").has_value());
}
