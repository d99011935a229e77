#include "kahler/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace kahler {

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::NotApplicable: return "not_applicable";
  }
  return "fail";
}

std::vector<std::string> check_names() {
  return {"model_invariants",   "ddbar_potential",     "norm_identity",     "zero_section_reduction",
          "griffiths_classification", "curvature_vertical_block", "curvature_horizontal_block", "taut_from_full",
          "taut_nonpositive",  "taut_strict",     "vertical_flatness", "ricci_two_ways",
          "ricci_zero_section", "primitive_exactness", "beta_bounded",   "sublevel_bound",
          "tangent_norm",       "schwarzian_mobius"};
}

void validate(const SuiteConfig& cfg) {
  if (cfg.samples < 1) throw std::invalid_argument("samples must be at least 1");
  if (!(cfg.tol_linear > 0.0) || !(cfg.tol_inverted > 0.0))
    throw std::invalid_argument("tolerances must be positive");
  if (cfg.workers < 1) throw std::invalid_argument("workers must be at least 1");
  const auto names = check_names();
  for (const auto& c : cfg.checks)
    if (std::find(names.begin(), names.end(), c) == names.end())
      throw std::invalid_argument("unknown check '" + c + "'");
}

std::vector<SamplePoint> sample_points(const ModelBundle& m, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const double lo = std::min(0.1, m.domain.v_radius);
  std::vector<SamplePoint> out;
  out.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    SamplePoint s;
    s.index = k;
    s.p.z = sample_base_point(m.domain, rng);
    s.p.v = k % 8 == 0 ? ComplexVector(ComplexVector::Zero(m.r))
                       : sample_fiber_vector(m.r, lo, m.domain.v_radius, rng);
    out.push_back(std::move(s));
  }
  return out;
}

// JSON helpers ----------------------------------------------------------------

ordered_json to_json_value(complex x) {
  if (x.imag() == 0.0) return x.real();
  return ordered_json::array({x.real(), x.imag()});
}

ordered_json to_json_value(const ComplexMatrix& a) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(to_json_value(a(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

ordered_json pairs(const ComplexVector& v) {
  ordered_json out = ordered_json::array();
  for (const complex& x : v) out.push_back({x.real(), x.imag()});
  return out;
}

ordered_json point_json(const SamplePoint& s) {
  return {{"index", s.index}, {"z", pairs(s.p.z)}, {"v", pairs(s.p.v)}};
}

ordered_json form_json(const CurvatureForm& f) {
  ordered_json out = ordered_json::array();
  for (int c = 0; c < f.form_dim; ++c) {
    ordered_json row = ordered_json::array();
    for (int d = 0; d < f.form_dim; ++d) row.push_back(to_json_value(f.at(c, d)));
    out.push_back(std::move(row));
  }
  return out;
}

// Per-point evaluation ----------------------------------------------------------

struct PointOutcome {
  bool applicable = true;
  double error = 0.0;
  std::string failure;  // non-empty when the evaluation itself threw
  std::string tag;      // free-form label aggregated into the detail line
};

PointOutcome measured(double error) {
  PointOutcome o;
  o.error = error;
  return o;
}

PointOutcome skipped() {
  PointOutcome o;
  o.applicable = false;
  return o;
}

using PointFn = std::function<PointOutcome(const SamplePoint&)>;

std::vector<PointOutcome> evaluate_points(const std::vector<SamplePoint>& points, int workers,
                                          const PointFn& fn) {
  std::vector<PointOutcome> out(points.size());
  auto run_one = [&](std::size_t k) {
    try {
      out[k] = fn(points[k]);
    } catch (const std::exception& e) {
      out[k].error = std::numeric_limits<double>::infinity();
      out[k].failure = e.what();
    }
  };
  if (workers <= 1 || points.size() < 2) {
    for (std::size_t k = 0; k < points.size(); ++k) run_one(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int count = std::min<int>(workers, static_cast<int>(points.size()));
  for (int t = 0; t < count; ++t)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < points.size(); k = next++) run_one(k);
    });
  for (auto& th : pool) th.join();
  return out;
}

enum class Subset { All, First50, ZeroSection };

struct CheckDef {
  std::string name;
  double tolerance;
  Subset subset = Subset::All;
  bool strict = false;  // pass iff max_error < tolerance
  std::string not_applicable;  // reason when the check cannot apply to the model
  PointFn fn;
};

CheckReport aggregate(const CheckDef& def, const ModelBundle& m,
                      const std::vector<SamplePoint>& points,
                      const std::vector<PointOutcome>& outcomes) {
  CheckReport r;
  r.check_name = def.name;
  r.model = m.name;
  r.tolerance = def.tolerance;
  r.max_error = 0.0;
  std::map<std::string, int> tags;
  int worst = -1;
  std::string failure;
  bool have_error = false;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const PointOutcome& o = outcomes[k];
    if (!o.tag.empty()) ++tags[o.tag];
    if (!o.applicable) continue;
    ++r.points_evaluated;
    if (!o.failure.empty() && failure.empty()) {
      failure = "point " + std::to_string(points[k].index) + ": " + o.failure;
      worst = static_cast<int>(k);
    }
    if (std::isnan(o.error) && failure.empty()) {
      failure = "point " + std::to_string(points[k].index) + ": NaN";
      worst = static_cast<int>(k);
    }
    if (!have_error || o.error > r.max_error) {
      r.max_error = o.error;
      have_error = true;
      if (failure.empty()) worst = static_cast<int>(k);
    }
  }
  for (const auto& [tag, count] : tags) {
    if (!r.detail.empty()) r.detail += ", ";
    r.detail += tag + ": " + std::to_string(count);
  }
  if (worst >= 0) r.witness = point_json(points[worst]);
  if (r.points_evaluated == 0) {
    r.status = CheckStatus::NotApplicable;
    if (!def.not_applicable.empty()) r.detail = def.not_applicable + (r.detail.empty() ? "" : "; " + r.detail);
    return r;
  }
  if (!failure.empty()) {
    r.status = CheckStatus::Fail;
    r.detail = failure + (r.detail.empty() ? "" : "; " + r.detail);
    return r;
  }
  const bool ok = def.strict ? r.max_error < def.tolerance : r.max_error <= def.tolerance;
  r.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  return r;
}

double relative(double diff, double scale) { return diff / std::max(1.0, scale); }

// Vertical-bundle contraction ⟨R^Ω(P), P⟩ out of the full curvature.
ComplexMatrix taut_contraction(const CurvatureForm& full, int n, const ComplexVector& v) {
  const int r = static_cast<int>(v.size());
  ComplexMatrix out(n, n);
  for (int a = 0; a < n; ++a)
    for (int s = 0; s < n; ++s) {
      const ComplexMatrix vv = full.at(a, s).bottomRightCorner(r, r);
      out(a, s) = (v.transpose() * vv * v.conjugate())(0, 0);
    }
  return out;
}

std::vector<CheckDef> point_checks(const ModelBundle& m, const SuiteConfig& cfg) {
  const int n = m.n, r = m.r, dim = n + r;
  const bool negative = m.expected_griffiths == GriffithsClass::Negative;
  const std::string not_negative =
      "model is not expected Griffiths negative (expected " +
      std::string(to_string(m.expected_griffiths)) + ")";
  std::vector<CheckDef> defs;

  defs.push_back({"ddbar_potential", cfg.tol_linear, Subset::All, false, "",
                  [&m](const SamplePoint& s) {
                    const auto [brute, frame] = ddbar_G_two_ways(m, s.p);
                    return measured(max_abs(brute - frame) / (1.0 + max_abs(brute)));
                  }});

  defs.push_back({"norm_identity", 1e-10, Subset::All, false, "", [&m](const SamplePoint& s) {
                    const NormIdentity nm = pG_norm(m, s.p);
                    const double scale = nm.G_value > 0.0 ? nm.G_value : 1.0;
                    return measured(std::max(std::abs(nm.norm_sq - nm.G_value),
                                                       std::abs(nm.norm_sq_coordinate - nm.G_value)) /
                                                  scale);
                  }});

  defs.push_back({"zero_section_reduction", 0.0, Subset::ZeroSection, false, "",
                  [&m](const SamplePoint& s) {
                    const FrameReport f = induced_metric(m, s.p);
                    return measured(std::max(max_abs(f.Psi), max_abs(f.Omega_h - f.g)));
                  }});

  defs.push_back({"griffiths_classification", 0.0, Subset::All, false,
                  "no expected classification declared",
                  [&m, seed = cfg.seed](const SamplePoint& s) {
                    const GriffithsResult g = griffiths_classify(m, s.p.z, 32, seed + s.index);
                    PointOutcome o;
                    o.tag = std::string(to_string(g.classification));
                    o.applicable = m.expected_griffiths != GriffithsClass::Indefinite;
                    o.error = g.classification == m.expected_griffiths ? 0.0 : 1.0;
                    return o;
                  }});

  defs.push_back({"curvature_vertical_block", cfg.tol_inverted, Subset::First50, false, "",
                  [&m, n, r](const SamplePoint& s) {
                    const CurvatureForm full = full_curvature(m, s.p);
                    const CurvatureBlocks cf = curvature_blocks_closed_form(m, s.p);
                    double diff = 0.0, scale = 0.0;
                    for (int a = 0; a < n; ++a)
                      for (int b = 0; b < n; ++b) {
                        const ComplexMatrix brute = full.at(a, b).bottomRightCorner(r, r);
                        diff = std::max(diff, max_abs(brute - cf.vv.at(a, b)));
                        scale = std::max(scale, max_abs(brute));
                      }
                    return measured(relative(diff, scale));
                  }});

  defs.push_back({"curvature_horizontal_block", cfg.tol_inverted, Subset::First50, false, "",
                  [&m, n, dim](const SamplePoint& s) {
                    const CurvatureForm full = full_curvature(m, s.p);
                    const CurvatureBlocks cf = curvature_blocks_closed_form(m, s.p);
                    double diff = 0.0, scale = 0.0;
                    for (int c = 0; c < dim; ++c)
                      for (int d = 0; d < dim; ++d) {
                        const ComplexMatrix brute = full.at(c, d).topLeftCorner(n, n);
                        diff = std::max(diff, max_abs(brute - cf.hh.at(c, d)));
                        scale = std::max(scale, max_abs(brute));
                      }
                    return measured(relative(diff, scale));
                  }});

  defs.push_back({"taut_from_full", cfg.tol_inverted, Subset::First50, false, "",
                  [&m, n](const SamplePoint& s) {
                    const TautologicalReport t = tautological_curvature(m, s.p);
                    if (!t.M) throw LinalgError("Omega_h is singular");
                    const ComplexMatrix brute = taut_contraction(full_curvature(m, s.p), n, s.p.v);
                    return measured(relative(max_abs(brute - *t.M), max_abs(brute)));
                  }});

  defs.push_back({"taut_nonpositive", 1e-10, Subset::All, false, not_negative,
                  [&m, negative](const SamplePoint& s) {
                    if (!negative) return skipped();
                    const TautologicalReport t = tautological_curvature(m, s.p);
                    if (!t.M) throw LinalgError("Omega_h is singular");
                    return measured(t.lambda_max);
                  }});

  defs.push_back({"taut_strict", -1e-12, Subset::All, true,
                  negative ? "no sampled point has v != 0 with Psi positive definite"
                           : not_negative,
                  [&m, negative](const SamplePoint& s) {
                    if (!negative || s.p.v.norm() < 0.1) return skipped();
                    const TautologicalReport t = tautological_curvature(m, s.p);
                    if (!t.strict_hypothesis) return skipped();
                    if (!t.M) throw LinalgError("Omega_h is singular");
                    return measured(t.lambda_max);
                  }});

  defs.push_back({"vertical_flatness", 1e-10, Subset::All, false, "",
                  [&m, n, dim](const SamplePoint& s) {
                    const CurvatureForm full = full_curvature(m, s.p);
                    double worst = 0.0;
                    for (int c = n; c < dim; ++c)
                      for (int d = n; d < dim; ++d)
                        worst = std::max(worst, max_abs(full.at(c, d).bottomRightCorner(dim - n, dim - n)));
                    return measured(worst);
                  }});

  defs.push_back({"ricci_two_ways", cfg.tol_inverted, Subset::All, false, "",
                  [&m](const SamplePoint& s) {
                    const RicciPair ric = ricci_two_ways(m, s.p);
                    return measured(relative(max_abs(ric.trace - ric.log_det),
                                                       max_abs(ric.log_det)));
                  }});

  defs.push_back({"ricci_zero_section", cfg.tol_linear, Subset::ZeroSection, false,
                  "fiber metric differs from the base metric",
                  [&m](const SamplePoint& s) {
                    if (!m.fiber_is_base) return skipped();
                    const auto [restricted, base] = zero_section_ricci_identity(m, s.p.z);
                    return measured(max_abs(restricted - base));
                  }});

  defs.push_back({"primitive_exactness", cfg.tol_linear, Subset::All, false,
                  "model declares no primitive beta", [&m](const SamplePoint& s) {
                    if (!m.beta) return skipped();
                    return measured(primitive_check(m, s.p).exactness_residual);
                  }});

  defs.push_back({"beta_bounded", 1e-10, Subset::All, false,
                  "needs a primitive beta and Psi >= 0", [&m](const SamplePoint& s) {
                    if (!m.beta) return skipped();
                    const FrameReport f = induced_metric(m, s.p);
                    if (herm_eig(hermitian_part(f.Psi))(0) < -1e-12) return skipped();
                    const PrimitiveReport pr = primitive_check(m, s.p);
                    return measured(pr.beta_norm * pr.beta_norm - pr.beta_norm_base_sq);
                  }});

  defs.push_back({"sublevel_bound", 1.0, Subset::All, true, "no sampled point has G < 1",
                  [&m](const SamplePoint& s) {
                    const NormIdentity nm = pG_norm(m, s.p);
                    if (!(nm.G_value < 1.0)) return skipped();
                    return measured(std::sqrt(std::max(0.0, nm.norm_sq)));
                  }});

  defs.push_back({"tangent_norm", cfg.tol_linear, Subset::All, false,
                  "model declares no potential",
                  [&m, n, r, seed = cfg.seed](const SamplePoint& s) {
                    if (!m.potential) return skipped();
                    Rng rng(seed ^ (0x9E3779B97F4A7C15ULL * (s.index + 1)));
                    ComplexVector u(n), w(r);
                    for (auto& x : u) x = rng.complex_normal();
                    for (auto& x : w) x = rng.complex_normal();
                    const auto [formula, direct] = tangent_norm_two_ways(m, s.p, u, w);
                    return measured(relative(std::abs(formula - direct), std::abs(direct)));
                  }});
  return defs;
}

CheckReport model_invariants_report(const ModelBundle& m, const SuiteConfig& cfg) {
  CheckReport r;
  r.check_name = "model_invariants";
  r.model = m.name;
  r.tolerance = 1e-10;
  const ModelInvariantReport inv = check_model_invariants(m, cfg.samples, cfg.seed);
  r.points_evaluated = inv.points;
  r.max_error = std::max(inv.max_hermitian_defect, inv.potential_gap);
  char buf[160];
  std::snprintf(buf, sizeof buf, "min eig g %.6g, min eig G %.6g, potential gap %.3g",
                inv.min_eigenvalue_g, inv.min_eigenvalue_G, inv.potential_gap);
  r.detail = buf;
  const bool definite = inv.min_eigenvalue_g > 1e-10 && inv.min_eigenvalue_G > 1e-10;
  r.status = definite && r.max_error <= r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
  return r;
}

CheckReport schwarzian_report(const ModelBundle& m, const SuiteConfig& cfg) {
  CheckReport r;
  r.check_name = "schwarzian_mobius";
  r.model = m.name;
  r.tolerance = 1e-12;
  Rng rng(cfg.seed);
  using namespace dsl;
  for (int k = 0; k < 20; ++k) {
    complex a, b, c, d;
    do {
      a = rng.complex_normal();
      b = rng.complex_normal();
      c = rng.complex_normal();
      d = rng.complex_normal();
    } while (std::abs(a * d - b * c) < 0.1);
    const Expr f = binary(BinaryOp::Div,
                          binary(BinaryOp::Add, binary(BinaryOp::Mul, literal(a), variable(0)), literal(b)),
                          binary(BinaryOp::Add, binary(BinaryOp::Mul, literal(c), variable(0)), literal(d)));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const complex z{-0.5 + 0.25 * i, -0.5 + 0.25 * j};
        if (std::abs(c * z + d) < 0.5) continue;
        const double err = std::abs(schwarzian(f, z));
        ++r.points_evaluated;
        if (err > r.max_error || r.witness.is_null()) {
          r.max_error = std::max(r.max_error, err);
          r.witness = {{"map", k},
                       {"coefficients", ordered_json::array({to_json_value(a), to_json_value(b),
                                                             to_json_value(c), to_json_value(d)})},
                       {"z", {z.real(), z.imag()}}};
        }
      }
  }
  r.detail = "20 Mobius maps on a 5x5 grid";
  r.status = r.max_error <= r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
  return r;
}

bool selected(const SuiteConfig& cfg, const std::string& name) {
  return cfg.checks.empty() ||
         std::find(cfg.checks.begin(), cfg.checks.end(), name) != cfg.checks.end();
}

template <typename F>
CheckReport timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckReport r = f();
  r.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

std::vector<CheckReport> run_suite(const ModelBundle& m, const SuiteConfig& cfg) {
  validate(cfg);
  const std::vector<SamplePoint> points = sample_points(m, cfg.samples, cfg.seed);
  std::vector<SamplePoint> first50(points.begin(), points.begin() + std::min<std::size_t>(50, points.size()));
  std::vector<SamplePoint> zero_section;
  for (const auto& s : points)
    if (s.p.v.norm() == 0.0) zero_section.push_back(s);

  std::vector<CheckReport> out;
  if (selected(cfg, "model_invariants"))
    out.push_back(timed([&] { return model_invariants_report(m, cfg); }));
  for (const CheckDef& def : point_checks(m, cfg)) {
    if (!selected(cfg, def.name)) continue;
    const auto& subset = def.subset == Subset::All       ? points
                         : def.subset == Subset::First50 ? first50
                                                         : zero_section;
    out.push_back(timed([&] {
      return aggregate(def, m, subset, evaluate_points(subset, cfg.workers, def.fn));
    }));
  }
  if (selected(cfg, "schwarzian_mobius"))
    out.push_back(timed([&] { return schwarzian_report(m, cfg); }));
  return out;
}

std::vector<CheckReport> run_suite(const SuiteConfig& cfg) {
  validate(cfg);
  std::vector<std::string> models;
  if (cfg.model == "all") models = builtin_names();
  else models.push_back(cfg.model);
  std::vector<CheckReport> out;
  for (const auto& name : models) {
    const ModelBundle m = resolve_model(name);
    auto reports = run_suite(m, cfg);
    out.insert(out.end(), reports.begin(), reports.end());
  }
  return out;
}

ordered_json conventions() {
  return {
      {"chern_curvature",
       "R_{i jbar a bbar} = -d_a dbar_b G_{i jbar} + G^{k lbar} d_a G_{i lbar} dbar_b G_{k jbar}"},
      {"inverse", "G_{i lbar} G^{lbar k} = delta_i^k"},
      {"frame_order", "horizontal delta/delta z^a first, then vertical d/dv^i"},
      {"forms", "(1,1)-forms as coefficients of dz^C ^ dzbar^D, sqrt(-1) carried separately"},
      {"ricci", "Ric = Tr R^Omega = -d dbar log(det G det Omega_h)"},
      {"hyperbolic_normalization", "(1 - |z|^2)^-2"},
  };
}

ordered_json report_json(const std::vector<CheckReport>& reports, const SuiteConfig& cfg,
                         bool include_timings) {
  ordered_json doc;
  doc["conventions"] = conventions();
  doc["config"] = {{"model", cfg.model},
                   {"samples", cfg.samples},
                   {"seed", cfg.seed},
                   {"tol_linear", cfg.tol_linear},
                   {"tol_inverted", cfg.tol_inverted},
                   {"checks", cfg.checks.empty() ? check_names() : cfg.checks}};
  ordered_json list = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json j = {{"check", r.check_name},
                      {"model", r.model},
                      {"status", std::string(to_string(r.status))},
                      {"passed", r.passed()},
                      {"points_evaluated", r.points_evaluated},
                      {"max_error", r.max_error},
                      {"tolerance", r.tolerance},
                      {"detail", r.detail},
                      {"witness", r.witness}};
    if (include_timings) j["wall_time_ms"] = r.wall_time_ms;
    list.push_back(std::move(j));
  }
  doc["all_passed"] = all_passed(reports);
  doc["reports"] = std::move(list);
  return doc;
}

bool all_passed(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed(); });
}

// Scan ------------------------------------------------------------------------------

ScanQuantity scan_quantity_from_string(std::string_view s) {
  if (s == "taut_lambda_max") return ScanQuantity::TautLambdaMax;
  if (s == "griffiths_min_eig") return ScanQuantity::GriffithsMinEig;
  if (s == "ricci_hh") return ScanQuantity::RicciHH;
  if (s == "G_value") return ScanQuantity::GValue;
  throw std::invalid_argument("unknown quantity '" + std::string(s) +
                              "' (taut_lambda_max|griffiths_min_eig|ricci_hh|G_value)");
}

std::string_view to_string(ScanQuantity q) {
  switch (q) {
    case ScanQuantity::TautLambdaMax: return "taut_lambda_max";
    case ScanQuantity::GriffithsMinEig: return "griffiths_min_eig";
    case ScanQuantity::RicciHH: return "ricci_hh";
    case ScanQuantity::GValue: return "G_value";
  }
  return "";
}

namespace {

double scan_value(const ModelBundle& m, const PointState& p, ScanQuantity q) {
  switch (q) {
    case ScanQuantity::TautLambdaMax: {
      const TautologicalReport t = tautological_curvature(m, p);
      return t.M ? t.lambda_max : std::numeric_limits<double>::quiet_NaN();
    }
    case ScanQuantity::GriffithsMinEig: {
      const ChernTensor R = chern_curvature(m, p.z);
      ComplexVector u = ComplexVector::Zero(m.r);
      if (p.v.norm() > 0.0) u = p.v / p.v.norm();
      else u(0) = 1.0;
      ComplexMatrix K(m.n, m.n);
      for (int a = 0; a < m.n; ++a)
        for (int b = 0; b < m.n; ++b)
          K(a, b) = (u.transpose() * R[a * m.n + b] * u.conjugate())(0, 0);
      return herm_eig(hermitian_part(K))(0);
    }
    case ScanQuantity::RicciHH: {
      const RicciPair ric = ricci_two_ways(m, p);
      return herm_eig(hermitian_part(ric.trace.topLeftCorner(m.n, m.n)))(m.n - 1);
    }
    case ScanQuantity::GValue: {
      const FrameReport f = induced_metric(m, p);
      return (p.v.transpose() * f.Omega_v * p.v.conjugate())(0, 0).real();
    }
  }
  return 0.0;
}

}  // namespace

std::vector<ScanRow> scan(const ModelBundle& m, const std::vector<int>& grid, ScanQuantity q,
                          const ComplexVector& v) {
  if (static_cast<int>(grid.size()) != 2 * m.n)
    throw std::invalid_argument("grid needs " + std::to_string(2 * m.n) +
                                " counts (re and im of each base coordinate)");
  long total = 1;
  for (int c : grid) {
    if (c < 1) throw std::invalid_argument("grid counts must be positive");
    total *= c;
    if (total > kMaxScanPoints)
      throw std::invalid_argument("grid exceeds " + std::to_string(kMaxScanPoints) + " points");
  }
  if (v.size() != m.r) throw std::invalid_argument("fiber vector has the wrong dimension");
  if (v.norm() > m.domain.v_radius + 1e-12)
    throw DomainError("fiber vector lies outside the model domain");

  std::vector<ScanRow> rows;
  rows.reserve(total);
  std::vector<int> idx(grid.size(), 0);
  for (long k = 0; k < total; ++k) {
    ScanRow row;
    PointState p{ComplexVector(m.n), v};
    for (std::size_t axis = 0; axis < grid.size(); ++axis) {
      const int a = static_cast<int>(axis / 2);
      const double center = axis % 2 == 0 ? m.domain.z_center[a].real() : m.domain.z_center[a].imag();
      const double half = m.domain.z_radius[a] / std::sqrt(2.0);
      const double x = grid[axis] == 1 ? center
                                       : center - half + 2.0 * half * idx[axis] / (grid[axis] - 1);
      row.coords.push_back(x);
    }
    for (int a = 0; a < m.n; ++a) p.z(a) = complex{row.coords[2 * a], row.coords[2 * a + 1]};
    row.value = scan_value(m, p, q);
    rows.push_back(std::move(row));
    for (int axis = static_cast<int>(grid.size()) - 1; axis >= 0; --axis) {
      if (++idx[axis] < grid[axis]) break;
      idx[axis] = 0;
    }
  }
  return rows;
}

std::string scan_csv(const ModelBundle& m, const std::vector<ScanRow>& rows, ScanQuantity q) {
  std::string out;
  for (int a = 0; a < m.n; ++a)
    out += "z" + std::to_string(a + 1) + "_re,z" + std::to_string(a + 1) + "_im,";
  out += std::string(to_string(q)) + "\n";
  char buf[40];
  for (const auto& row : rows) {
    for (double x : row.coords) {
      std::snprintf(buf, sizeof buf, "%.17g,", x);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", row.value);
    out += buf;
  }
  return out;
}

// Tensor dump -------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ComplexVector parse_vector(const std::string& text, const std::string& key) {
  std::vector<complex> values;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string piece = trim(std::string_view(text).substr(start, comma - start));
    const dsl::Expr e = dsl::parse(piece);
    if (dsl::max_variable(e) >= 0)
      throw std::invalid_argument(key + " components must be constants, got '" + piece + "'");
    values.push_back(dsl::evaluate<complex>(e, {}));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return Eigen::Map<ComplexVector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

PointState parse_point(const ModelBundle& m, const std::string& text) {
  PointState p{ComplexVector(), ComplexVector::Zero(m.r)};
  bool have_z = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t semi = text.find(';', start);
    const std::string part = trim(std::string_view(text).substr(start, semi - start));
    if (!part.empty()) {
      const std::size_t eq = part.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("expected key=value in '" + part + "'");
      const std::string key = trim(std::string_view(part).substr(0, eq));
      const ComplexVector values = parse_vector(part.substr(eq + 1), key);
      if (key == "z") {
        p.z = values;
        have_z = true;
      } else if (key == "v") {
        p.v = values;
      } else {
        throw std::invalid_argument("unknown point key '" + key + "' (use z and v)");
      }
    }
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  if (!have_z) throw std::invalid_argument("point needs z=...");
  if (p.z.size() != m.n || p.v.size() != m.r)
    throw std::invalid_argument("point needs " + std::to_string(m.n) + " z and " +
                                std::to_string(m.r) + " v components");
  if (!contains(m.domain, p)) throw DomainError("point lies outside the domain of '" + m.name + "'");
  return p;
}

std::vector<std::string> tensor_kinds() {
  return {"omega", "chern", "taut", "ricci", "full", "blocks", "ddbar", "norm", "primitive"};
}

ordered_json tensor_at(const ModelBundle& m, const PointState& p, const std::string& what) {
  ordered_json doc;
  doc["model"] = m.name;
  doc["point"] = {{"z", pairs(p.z)}, {"v", pairs(p.v)}};
  doc["what"] = what;
  doc["conventions"] = conventions();
  if (what == "omega") {
    const FrameReport f = induced_metric(m, p);
    doc["Omega_h"] = to_json_value(f.Omega_h);
    doc["Omega_v"] = to_json_value(f.Omega_v);
    doc["Psi"] = to_json_value(f.Psi);
    doc["g"] = to_json_value(f.g);
    doc["connection"] = to_json_value(f.connection);
    doc["omega_h_positive"] = f.omega_h_positive;
  } else if (what == "chern") {
    const ChernTensor R = chern_curvature(m, p.z);
    ordered_json rows = ordered_json::array();
    for (int a = 0; a < m.n; ++a) {
      ordered_json row = ordered_json::array();
      for (int b = 0; b < m.n; ++b) row.push_back(to_json_value(R[a * m.n + b]));
      rows.push_back(std::move(row));
    }
    doc["R"] = std::move(rows);
  } else if (what == "taut") {
    const TautologicalReport t = tautological_curvature(m, p);
    doc["M"] = t.M ? to_json_value(*t.M) : ordered_json(nullptr);
    doc["lambda_max"] = t.M ? ordered_json(t.lambda_max) : ordered_json(nullptr);
    doc["Psi"] = to_json_value(t.Psi);
    doc["strict_hypothesis"] = t.strict_hypothesis;
  } else if (what == "ricci") {
    const RicciPair ric = ricci_two_ways(m, p);
    doc["trace"] = to_json_value(ric.trace);
    doc["log_det"] = to_json_value(ric.log_det);
    doc["ddbar_log_det"] = to_json_value(ric.ddbar_log_det);
  } else if (what == "full") {
    doc["components"] = form_json(full_curvature(m, p));
  } else if (what == "blocks") {
    const CurvatureBlocks b = curvature_blocks_closed_form(m, p);
    doc["vv"] = form_json(b.vv);
    doc["hh"] = form_json(b.hh);
  } else if (what == "ddbar") {
    const auto [brute, frame] = ddbar_G_two_ways(m, p);
    doc["coordinate_hessian"] = to_json_value(brute);
    doc["frame_route"] = to_json_value(frame);
  } else if (what == "norm") {
    const NormIdentity nm = pG_norm(m, p);
    doc["norm_sq"] = nm.norm_sq;
    doc["norm_sq_coordinate"] = nm.norm_sq_coordinate;
    doc["G_value"] = nm.G_value;
  } else if (what == "primitive") {
    const PrimitiveReport pr = primitive_check(m, p);
    doc["exactness_residual"] = pr.exactness_residual;
    doc["beta_norm"] = pr.beta_norm;
    doc["beta_norm_base_sq"] = pr.beta_norm_base_sq;
    doc["pG_norm"] = pr.pG_norm;
    doc["G_value"] = pr.G_value;
  } else {
    std::string kinds;
    for (const auto& k : tensor_kinds()) kinds += (kinds.empty() ? "" : "|") + k;
    throw std::invalid_argument("unknown tensor kind '" + what + "' (" + kinds + ")");
  }
  return doc;
}

ordered_json bound_json(int genus) {
  const NehariBound b = nehari_l2_radius(genus);
  return {{"genus", genus},
          {"radius", b.radius},
          {"sup_bound", b.sup_bound},
          {"area", b.area},
          {"chain_exact", b.chain_exact}};
}

}  // namespace kahler
