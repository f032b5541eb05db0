#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ambres::cli {

struct Settings {
  std::string command;
  std::string scenario_path;
  std::string model_path;
  std::string out_path;
  std::string format = "csv";
  std::vector<double> grid;
  std::vector<double> starts;
  std::vector<std::string> sets;
  std::vector<std::string> kinds;
  std::vector<std::string> coords;
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  std::optional<double> h_prime;  // log10(h' / (1 - h'))
  std::string variant = "v1";
  std::string proposal;           // model, optimized or shifted
  std::string nu;
  int count = 1;
  int threads = 1;
};

// Truncation constants, overridable through the environment.
struct Constants {
  double decoder_c = 50.0;
  std::optional<double> voronoi_c;
  double facet_window = 6.0;
  double mc_window = 13.815510557964274;
  double gap_threshold = 0.05;
};

Constants constants_from_env();

// Grids must be nonempty and strictly monotone.
void check_grid(const std::vector<double>& grid, const std::string& what);

void run_command(const Settings& s, const Constants& k, std::ostream& out);

}  // namespace ambres::cli
