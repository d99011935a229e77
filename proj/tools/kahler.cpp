// Command-line front end: verify, scan, tensor, bound, list.
//
// Exit status: 0 when every check passes, 1 when a check fails, 2 on usage,
// model-spec or domain errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "kahler/harness.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature checks for Kähler metrics on Hermitian vector bundles"};
  app.require_subcommand(1);

  kahler::SuiteConfig cfg;
  std::string checks, out_path;
  bool timings = false;
  auto* verify = app.add_subcommand("verify", "Run the verification suite on a model");
  verify->add_option("--model", cfg.model, "Builtin name, spec path, or 'all'")->required();
  verify->add_option("--samples", cfg.samples, "Sample points per model")->capture_default_str();
  verify->add_option("--seed", cfg.seed, "PRNG seed")->capture_default_str();
  verify->add_option("--tol-linear", cfg.tol_linear, "Tolerance for jet-linear identities")
      ->capture_default_str();
  verify->add_option("--tol-inverted", cfg.tol_inverted,
                     "Relative tolerance for identities through matrix inverses")
      ->capture_default_str();
  verify->add_option("--checks", checks, "Comma-separated subset of checks");
  verify->add_option("--workers", cfg.workers, "Worker threads over sample points")
      ->capture_default_str();
  verify->add_option("--out", out_path, "Write the JSON report here instead of stdout");
  verify->add_flag("--timings", timings, "Include wall_time_ms (makes reports run-dependent)");

  std::string scan_model, grid_text, quantity, fiber_text, scan_out;
  auto* scan = app.add_subcommand("scan", "Tabulate a scalar field over a base grid");
  scan->add_option("--model", scan_model, "Builtin name or spec path")->required();
  scan->add_option("--grid", grid_text, "Counts per real axis, e.g. 5,5")->required();
  scan->add_option("--quantity", quantity,
                   "taut_lambda_max | griffiths_min_eig | ricci_hh | G_value")
      ->required();
  scan->add_option("--v", fiber_text, "Fiber vector, comma-separated (default e1)");
  scan->add_option("--out", scan_out, "CSV path (stdout if omitted)");

  std::string tensor_model, point_text, what;
  auto* tensor = app.add_subcommand("tensor", "Dump tensors at one point as JSON");
  tensor->add_option("--model", tensor_model, "Builtin name or spec path")->required();
  tensor->add_option("--point", point_text, "\"z=...;v=...\"")->required();
  tensor->add_option("--what", what,
                     "omega | chern | taut | ricci | full | blocks | ddbar | norm | primitive")
      ->required();

  int genus = 0;
  auto* bound = app.add_subcommand("bound", "L2 radius 9 pi (g - 1) and its arithmetic chain");
  bound->add_option("--genus", genus, "Genus, at least 2")->required();

  auto* list = app.add_subcommand("list", "List builtin models and checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*verify) {
      cfg.checks = split(checks, ',');
      const auto reports = kahler::run_suite(cfg);
      write_output(out_path, kahler::report_json(reports, cfg, timings).dump(2) + "\n");
      if (!out_path.empty() && out_path != "-")
        for (const auto& r : reports)
          std::printf("%-4s %-18s %-26s max_error=%.3g tol=%.3g\n",
                      r.status == kahler::CheckStatus::Pass   ? "pass"
                      : r.status == kahler::CheckStatus::Fail ? "FAIL"
                                                              : "n/a",
                      r.model.c_str(), r.check_name.c_str(), r.max_error, r.tolerance);
      return kahler::all_passed(reports) ? 0 : kExitFail;
    }
    if (*scan) {
      const kahler::ModelBundle m = kahler::resolve_model(scan_model);
      std::vector<int> grid;
      for (const auto& g : split(grid_text, ',')) grid.push_back(std::stoi(g));
      kahler::ComplexVector v = kahler::ComplexVector::Zero(m.r);
      if (fiber_text.empty()) {
        v(0) = 1.0;
      } else {
        v = kahler::parse_vector(fiber_text, "v");
      }
      const auto q = kahler::scan_quantity_from_string(quantity);
      write_output(scan_out, kahler::scan_csv(m, kahler::scan(m, grid, q, v), q));
      return 0;
    }
    if (*tensor) {
      const kahler::ModelBundle m = kahler::resolve_model(tensor_model);
      const kahler::PointState p = kahler::parse_point(m, point_text);
      std::cout << kahler::tensor_at(m, p, what).dump(2) << "\n";
      return 0;
    }
    if (*bound) {
      std::cout << kahler::bound_json(genus).dump(2) << "\n";
      return 0;
    }
    if (*list) {
      std::cout << "models:";
      for (const auto& n : kahler::builtin_names()) std::cout << " " << n;
      std::cout << "\nchecks:";
      for (const auto& c : kahler::check_names()) std::cout << " " << c;
      std::cout << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
