#include <fmt/format.h>

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ambres/errors.hpp"
#include "commands.hpp"

namespace {

constexpr int kValidationFailure = 2;
constexpr int kNumericalFailure = 3;

void add_common(CLI::App& sub, ambres::cli::Settings& s) {
  sub.add_option("--out", s.out_path, "Output file (default stdout)");
  sub.add_option("--format", s.format, "Output format")->check(CLI::IsMember({"csv"}));
  sub.add_option("--seed", s.seed, "Random seed");
  sub.add_option("--samples", s.samples, "Monte Carlo sample budget (0 disables MC in sweeps)");
  sub.add_option("--threads", s.threads, "Worker threads")->check(CLI::PositiveNumber);
  sub.add_option("--h-prime", s.h_prime, "Confidence threshold as log10(h'/(1-h'))");
}

void add_model_input(CLI::App& sub, ambres::cli::Settings& s) {
  auto* model = sub.add_option("--model", s.model_path, "Matrix file with the ambiguity model");
  auto* scenario = sub.add_option("--scenario", s.scenario_path, "Scenario JSON file");
  model->excludes(scenario);
}

void add_sweep(CLI::App& sub, ambres::cli::Settings& s, const std::string& grid_help) {
  sub.add_option("--scenario", s.scenario_path, "Scenario JSON file")->required();
  sub.add_option("--grid", s.grid, grid_help)->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integer ambiguity resolution: decisions, success-rate bounds and Monte Carlo estimates"};
  app.require_subcommand(1);
  ambres::cli::Settings s;

  auto* decode = app.add_subcommand("decode", "MAP or conditional decision for float solutions");
  add_common(*decode, s);
  add_model_input(*decode, s);
  decode->add_option("--nu", s.nu, "Float solution, comma separated; otherwise simulated from zero");
  decode->add_option("--count", s.count, "Number of simulated float solutions");

  auto* voronoi = app.add_subcommand("voronoi", "Voronoi-relevant vectors and their distances");
  add_common(*voronoi, s);
  add_model_input(*voronoi, s);

  auto* bounds = app.add_subcommand("bounds", "Union lower and minimum-distance upper success-rate bounds");
  add_common(*bounds, s);
  add_model_input(*bounds, s);

  auto* mc = app.add_subcommand("mc", "Monte Carlo success and error rates");
  add_common(*mc, s);
  add_model_input(*mc, s);
  mc->add_option("--variant", s.variant, "v1 (weighted indicator) or v2 (shifted Gaussians)")
      ->check(CLI::IsMember({"v1", "v2"}));
  mc->add_option("--proposal", s.proposal, "model, optimized or shifted")
      ->check(CLI::IsMember({"model", "optimized", "shifted"}));

  auto* sweep_iono = app.add_subcommand("sweep-iono", "Success rate versus ionospheric variance");
  add_common(*sweep_iono, s);
  add_sweep(*sweep_iono, s, "sigma_delta_iono values in m");
  sweep_iono->add_option("--sets", s.sets, "Measurement sets, e.g. L1,L1+L2")->delimiter(',');
  sweep_iono->add_option("--kinds", s.kinds, "cold, non_self, self")->delimiter(',');

  auto* init_compare = app.add_subcommand("init-compare", "Cold versus succeeding initialization");
  add_common(*init_compare, s);
  add_sweep(*init_compare, s, "sigma_delta_iono values in m");
  init_compare->add_option("--sets", s.sets, "Measurement sets")->delimiter(',');
  init_compare->add_option("--kinds", s.kinds, "cold, non_self, self")->delimiter(',');

  auto* sweep_duration = app.add_subcommand("sweep-duration", "Success rate versus sampling duration");
  add_common(*sweep_duration, s);
  add_sweep(*sweep_duration, s, "durations in s");
  sweep_duration->add_option("--starts", s.starts, "Window start times in s")->delimiter(',');
  sweep_duration->add_option("--coords", s.coords, "static, kinematic")->delimiter(',');

  auto* range_error = app.add_subcommand("range-error", "Posterior range error given resolved ambiguities");
  add_common(*range_error, s);
  add_sweep(*range_error, s, "sigma_delta_iono values in m");
  range_error->add_option("--sets", s.sets, "Measurement sets")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationFailure;
  }
  s.command = app.get_subcommands().front()->get_name();

  try {
    const auto constants = ambres::cli::constants_from_env();
    if (s.out_path.empty()) {
      ambres::cli::run_command(s, constants, std::cout);
    } else {
      std::ofstream out(s.out_path);
      if (!out) throw ambres::Error(ambres::ErrorCode::InvalidInput, "cannot write " + s.out_path);
      ambres::cli::run_command(s, constants, out);
    }
  } catch (const ambres::Error& e) {
    fmt::print(stderr, "error ({}): {}\n", ambres::to_string(e.code()), e.what());
    return ambres::is_numerical(e.code()) ? kNumericalFailure : kValidationFailure;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kNumericalFailure;
  }
  return 0;
}
