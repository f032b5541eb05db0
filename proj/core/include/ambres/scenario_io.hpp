#pragma once

#include <string>

#include "ambres/gnss.hpp"

namespace ambres::gnss {

// JSON scenario document. Satellites come from one of
//   "satellites": {"synthetic": {"n_sat": 7, "seed": 1, "start": 0}}
//   "satellites": {"los_csv": "path"}            (relative to the file)
//   "satellites": {"los": [[[ex, ey, ez], ...], ...]}
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir = ".");
Scenario read_scenario_file(const std::string& path);
std::string scenario_to_json(const Scenario& s);

// Rows "epoch,satellite,ex,ey,ez"; a non-numeric first line is a header.
std::vector<EpochGeometry> read_los_csv(const std::string& path);

}  // namespace ambres::gnss
