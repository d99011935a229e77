#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "kahler/geometry.hpp"
#include "kahler/model.hpp"

namespace kahler {

using ordered_json = nlohmann::ordered_json;

struct SuiteConfig {
  std::string model = "disk_tangent";
  int samples = 200;
  std::uint64_t seed = 42;
  double tol_linear = 1e-9;
  double tol_inverted = 1e-8;
  std::vector<std::string> checks;  // empty selects every check
  int workers = 1;
};

/// Throws std::invalid_argument when samples, tolerances or check names are bad.
void validate(const SuiteConfig& cfg);

enum class CheckStatus { Pass, Fail, NotApplicable };
std::string_view to_string(CheckStatus s);

struct CheckReport {
  std::string check_name;
  std::string model;
  CheckStatus status = CheckStatus::NotApplicable;
  int points_evaluated = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::string detail;
  ordered_json witness;  // worst point, null when nothing was evaluated
  double wall_time_ms = 0.0;

  bool passed() const { return status != CheckStatus::Fail; }
};

std::vector<std::string> check_names();

struct SamplePoint {
  int index = 0;
  PointState p;
};

/// Seeded draws inside the model domain. Every eighth point lies on the zero
/// section; the rest have ‖v‖ uniform in [0.1, v_radius].
std::vector<SamplePoint> sample_points(const ModelBundle& m, int samples, std::uint64_t seed);

std::vector<CheckReport> run_suite(const ModelBundle& m, const SuiteConfig& cfg);
/// Resolves cfg.model ("all" runs every builtin in catalog order).
std::vector<CheckReport> run_suite(const SuiteConfig& cfg);

ordered_json conventions();
ordered_json report_json(const std::vector<CheckReport>& reports, const SuiteConfig& cfg,
                         bool include_timings);
bool all_passed(const std::vector<CheckReport>& reports);

// Scan -------------------------------------------------------------------------

enum class ScanQuantity { TautLambdaMax, GriffithsMinEig, RicciHH, GValue };
ScanQuantity scan_quantity_from_string(std::string_view s);
std::string_view to_string(ScanQuantity q);

struct ScanRow {
  std::vector<double> coords;  // re/im interleaved per base coordinate
  double value = 0.0;
};

inline constexpr long kMaxScanPoints = 1'000'000;

/// Grid over the square inscribed in each coordinate disk, with one count per
/// real axis (2n entries). The fiber vector is held fixed.
std::vector<ScanRow> scan(const ModelBundle& m, const std::vector<int>& grid, ScanQuantity q,
                          const ComplexVector& v);
std::string scan_csv(const ModelBundle& m, const std::vector<ScanRow>& rows, ScanQuantity q);

// Tensor dump and bound ------------------------------------------------------------

/// Comma-separated constant DSL expressions, e.g. "0.3+0.1i, 2".
ComplexVector parse_vector(const std::string& text, const std::string& key = "vector");
/// Parses "z=a,b;v=c" where every component is a constant DSL expression.
PointState parse_point(const ModelBundle& m, const std::string& text);
std::vector<std::string> tensor_kinds();
ordered_json tensor_at(const ModelBundle& m, const PointState& p, const std::string& what);
ordered_json bound_json(int genus);

ordered_json to_json_value(complex x);
ordered_json to_json_value(const ComplexMatrix& a);

}  // namespace kahler
