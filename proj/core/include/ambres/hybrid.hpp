#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ambres/bounds.hpp"
#include "ambres/montecarlo.hpp"
#include "ambres/voronoi.hpp"

namespace ambres {

// One labelled success-rate value. method is one of bound-lower,
// bound-upper, mc-v1, mc-v2.
struct RateRow {
  std::string method;
  double value = 0.0;
  double complement = 1.0;
  double log_odds = 0.0;
  double log_odds_error = 0.0;  // zero for bounds
  std::int64_t samples = 0;
  bool selected = false;
};

struct HybridOptions {
  double gap_threshold = 0.05;   // log-odds gap above which MC replaces the bound
  std::int64_t samples = 100000;  // zero disables MC
  std::uint64_t seed = 1;
  double plain_below = 1.0;       // below this union log-odds, sample nu from M itself
  std::optional<double> voronoi_c;
  BoundOptions bounds;
  McOptions mc;
  DecoderOptions decoder;
};

struct HybridRate {
  std::vector<RateRow> rows;
  RelevantVectorSet relevant;
  const RateRow& selected() const;
  const RateRow* find(const std::string& method) const;
};

// Success rate of the MAP decision (or the conditional one when h is set):
// union lower bound, minimum-distance upper bound, and an MC estimate when the
// two bounds disagree by more than the gap threshold.
HybridRate hybrid_rate(const AmbiguityModel& model, const std::optional<HPrime>& h, const HybridOptions& opt = {});

RateRow rate_row(const std::string& method, const RateEstimate& e);

}  // namespace ambres
