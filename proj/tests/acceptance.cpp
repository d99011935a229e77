// Acceptance run: one line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "kahler/geometry.hpp"
#include "kahler/harness.hpp"

namespace {

using namespace kahler;

struct Outcome {
  bool pass = true;
  std::string summary;
};

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

const std::vector<ModelBundle>& catalog() {
  static const std::vector<ModelBundle> models = [] {
    std::vector<ModelBundle> out;
    for (const auto& name : builtin_names()) out.push_back(builtin(name));
    return out;
  }();
  return models;
}

Outcome ddbar_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int points = 0;
  for (const auto& m : catalog())
    for (const auto& s : sample_points(m, 200, 42)) {
      const auto [a, b] = ddbar_G_two_ways(m, s.p);
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff() / (1.0 + a.cwiseAbs().maxCoeff()));
      ++points;
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-9 && secs < 5.0 && points == 1200,
          fmt("%.0f points, max %.2e (tol 1e-9), %.2f s (budget 5 s)", points, worst, secs)};
}

Outcome norm_identity() {
  double worst = 0.0;
  for (const auto& m : catalog())
    for (const auto& s : sample_points(m, 200, 42)) {
      const auto n = pG_norm(m, s.p);
      const double scale = std::max(1.0, n.G_value);
      worst = std::max({worst, std::abs(n.norm_sq - n.G_value) / scale,
                        std::abs(n.norm_sq_coordinate - n.G_value) / scale});
    }
  return {worst < 1e-10, fmt("max relative %.2e (tol 1e-10)", worst)};
}

Outcome closed_form_blocks() {
  double worst_vv = 0.0, worst_hh = 0.0, offdiag = 0.0;
  for (const auto& m : catalog()) {
    const auto samples = sample_points(m, 50, 42);
    for (const auto& s : samples) {
      const auto full = full_curvature(m, s.p);
      const auto closed = curvature_blocks_closed_form(m, s.p);
      const int dim = m.n + m.r;
      for (int a = 0; a < m.n; ++a)
        for (int b = 0; b < m.n; ++b) {
          const double e = rel(closed.vv.at(a, b), full.at(a, b).bottomRightCorner(m.r, m.r));
          worst_vv = std::max(worst_vv, e);
          if (m.name == "product_rank2" && a != b) offdiag = std::max(offdiag, e);
        }
      for (int c = 0; c < dim; ++c)
        for (int d = 0; d < dim; ++d) {
          const double e = rel(closed.hh.at(c, d), full.at(c, d).topLeftCorner(m.n, m.n));
          worst_hh = std::max(worst_hh, e);
          if (m.name == "product_rank2" && c != d) offdiag = std::max(offdiag, e);
        }
    }
  }
  return {worst_vv < 1e-8 && worst_hh < 1e-8,
          fmt("vertical %.2e, horizontal %.2e, product off-diagonal %.2e (tol 1e-8)", worst_vv,
              worst_hh, offdiag)};
}

Outcome tautological_sign() {
  double worst = -1e300, worst_strict = -1e300;
  int strict_points = 0;
  bool all_invertible = true;
  for (const auto& m : catalog()) {
    if (m.expected_griffiths != GriffithsClass::Negative) continue;
    for (const auto& s : sample_points(m, 200, 42)) {
      const auto t = tautological_curvature(m, s.p);
      if (!t.M) {
        all_invertible = false;
        continue;
      }
      worst = std::max(worst, t.lambda_max);
      if (s.p.v.norm() >= 0.1 && t.strict_hypothesis) {
        worst_strict = std::max(worst_strict, t.lambda_max);
        ++strict_points;
      }
    }
  }
  return {all_invertible && worst <= 1e-10 && strict_points > 0 && worst_strict < -1e-12,
          fmt("max lambda %.2e (<= 1e-10); strict max %.2e (< -1e-12) over %.0f points", worst,
              worst_strict, strict_points)};
}

Outcome vertical_flatness() {
  double worst = 0.0;
  for (const auto& m : catalog())
    for (const auto& s : sample_points(m, 200, 42)) {
      const auto full = full_curvature(m, s.p);
      for (int i = m.n; i < m.n + m.r; ++i)
        for (int j = m.n; j < m.n + m.r; ++j)
          worst = std::max(worst, full.at(i, j).bottomRightCorner(m.r, m.r).cwiseAbs().maxCoeff());
    }
  return {worst < 1e-10, fmt("max %.2e (tol 1e-10)", worst)};
}

Outcome ricci() {
  double worst = 0.0, zero_section = 0.0;
  for (const auto& m : catalog()) {
    for (const auto& s : sample_points(m, 200, 42)) {
      const auto r = ricci_two_ways(m, s.p);
      worst = std::max(worst, rel(r.trace, r.log_det));
      if (m.fiber_is_base && s.p.v.norm() == 0.0) {
        const auto [a, b] = zero_section_ricci_identity(m, s.p.z);
        zero_section = std::max(zero_section, (a - b).cwiseAbs().maxCoeff());
      }
    }
  }
  PointState origin{ComplexVector::Zero(1), ComplexVector::Zero(1)};
  const auto disk = ricci_two_ways(builtin("disk_tangent"), origin);
  const double h = disk.ddbar_log_det(0, 0).real(), v = disk.ddbar_log_det(1, 1).real();
  const double value_err = std::max(std::abs(h - 4.0), std::abs(v - 2.0));
  return {worst < 1e-8 && value_err < 1e-8 && zero_section < 1e-9,
          fmt("two routes %.2e (tol 1e-8); disk origin (4, 2) off by %.2e; zero section %.2e "
              "(tol 1e-9)",
              worst, value_err, zero_section)};
}

Outcome d_bounded() {
  const auto disk = builtin("disk_tangent");
  double residual = 0.0, beta_err = 0.0, beta_sup = 0.0, margin = -1e300;
  int sublevel = 0;
  for (const auto& s : sample_points(disk, 200, 42)) {
    const auto p = primitive_check(disk, s.p);
    residual = std::max(residual, p.exactness_residual);
    beta_err = std::max(beta_err, std::abs(p.beta_norm_base_sq - std::norm(s.p.z(0))));
    beta_sup = std::max(beta_sup, p.beta_norm_base_sq);
    if (p.G_value < 1.0) {
      margin = std::max(margin, p.pG_norm - 1.0);
      ++sublevel;
    }
  }
  return {residual < 1e-9 && beta_err < 1e-10 && beta_sup <= 0.64 && sublevel > 0 && margin < 0.0,
          fmt("residual %.2e (tol 1e-9); |beta|^2 - |z|^2 %.2e (tol 1e-10), sup %.3f; ", residual,
              beta_err, beta_sup) +
              fmt("max |dG| - 1 = %.3f over %.0f points with G < 1", margin, sublevel)};
}

Outcome nehari() {
  const auto g2 = nehari_l2_radius(2), g3 = nehari_l2_radius(3);
  const bool exact = g2.radius == 9.0 * std::numbers::pi && g3.radius == 18.0 * std::numbers::pi &&
                     g2.chain_exact && g3.chain_exact;
  return {exact, fmt("radius(2) = %.17g, radius(3) = %.17g", g2.radius, g3.radius)};
}

Outcome schwarzian_checks() {
  using namespace dsl;
  Rng rng(42);
  double worst = 0.0;
  int maps = 0;
  while (maps < 20) {
    const complex a = rng.complex_normal(), b = rng.complex_normal(), c = rng.complex_normal(),
                  d = rng.complex_normal();
    if (std::abs(a * d - b * c) < 0.1) continue;
    ++maps;
    const Expr z = variable(0);
    const Expr f = binary(BinaryOp::Div, binary(BinaryOp::Add, binary(BinaryOp::Mul, literal(a), z), literal(b)),
                          binary(BinaryOp::Add, binary(BinaryOp::Mul, literal(c), z), literal(d)));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const complex w(-0.5 + 0.25 * i, -0.5 + 0.25 * j);
        if (std::abs(c * w + d) < 0.5) continue;
        worst = std::max(worst, std::abs(schwarzian(f, w)));
      }
  }
  const double e1 = std::abs(schwarzian(parse("exp(z1)"), 0.0) + 0.5);
  const double e2 = std::abs(schwarzian(parse("z1^2"), 1.0) + 1.5);
  return {worst < 1e-12 && e1 < 1e-10 && e2 < 1e-10,
          fmt("Mobius max %.2e (tol 1e-12); exp off by %.2e, z^2 off by %.2e (tol 1e-10)", worst,
              e1, e2)};
}

Outcome counterexample() {
  const auto o1 = builtin("o1_positive");
  int not_negative = 0, total = 0;
  for (const auto& s : sample_points(o1, 200, 42)) {
    const auto r = griffiths_classify(o1, s.p.z, 32, 42 + s.index);
    not_negative += r.classification != GriffithsClass::Negative;
    ++total;
  }
  const auto flat = builtin("flat");
  bool flat_ok = true;
  for (const auto& s : sample_points(flat, 200, 42))
    flat_ok = flat_ok && griffiths_classify(flat, s.p.z, 32, 42 + s.index).classification ==
                             GriffithsClass::Flat;
  return {not_negative == total && flat_ok,
          fmt("o1_positive not negative at %.0f/%.0f points; flat classified flat: %.0f",
              not_negative, total, flat_ok)};
}

Outcome determinism() {
  SuiteConfig cfg;
  cfg.model = "all";
  const auto t0 = std::chrono::steady_clock::now();
  const auto first = run_suite(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string a = report_json(first, cfg, false).dump(2);
  const std::string b = report_json(run_suite(cfg), cfg, false).dump(2);
  return {a == b && secs < 60.0 && all_passed(first),
          fmt("single-threaded %.2f s (budget 60 s), identical: %.0f, all passed: %.0f", secs,
              a == b, all_passed(first))};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"ddbar of the fiber norm, coordinates vs frame", ddbar_identity},
      {"norm of dG equals G", norm_identity},
      {"closed-form curvature blocks vs brute force", closed_form_blocks},
      {"tautological curvature sign", tautological_sign},
      {"vertical flatness", vertical_flatness},
      {"Ricci form", ricci},
      {"bounded primitive", d_bounded},
      {"L2 radius arithmetic", nehari},
      {"Schwarzian derivative", schwarzian_checks},
      {"non-negative model detection", counterexample},
      {"determinism and runtime", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2zu %-46s %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].name,
                o.summary.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
