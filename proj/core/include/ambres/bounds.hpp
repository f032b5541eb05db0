#pragma once

#include <optional>
#include <vector>

#include "ambres/decoder.hpp"
#include "ambres/voronoi.hpp"

namespace ambres {

// Probability that a one-dimensional N(0, 1/a^2) error stays inside (-xi, xi).
double one_dim_success(double a, double xi);
// Probability of landing within xi of +-1 (modified) or beyond 1 - xi.
double one_dim_error(double a, double xi, bool modified);

// Half-width xi of the one-dimensional acceptance interval at threshold h'.
// Returns 1/2 when h' is at or below the bisection value.
double xi_from_h(double a, const HPrime& h);
// 1 - p(0 | xi) / h0 for the one-dimensional lattice with spacing a.
double one_dim_complement(double a, double xi);

struct FacetTerm {
  double a = 0.0;
  double xi = 0.5;
  double alpha = 0.0;
  double alpha_complement = 0.0;
  double beta = 0.0;
};

struct RateBoundResult {
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  double beta_lower = 0.0;
  double beta_upper = 0.0;
  // 1 - alpha_lower and 1 - alpha_upper without cancellation.
  double alpha_lower_complement = 1.0;
  double alpha_upper_complement = 1.0;
  std::vector<FacetTerm> per_facet;
  std::optional<HPrime> h_prime;
  int dropped_facets = 0;
};

struct BoundOptions {
  bool modified = true;
  double facet_window = 6.0;  // facets with a_i > a_min + window are dropped
};

RateBoundResult map_bounds(const RelevantVectorSet& rv, const BoundOptions& opt = {});
RateBoundResult conditional_bounds(const RelevantVectorSet& rv, const HPrime& h, const BoundOptions& opt = {});

struct SingleApproximation {
  double alpha = 0.0;
  double alpha_complement = 1.0;
  double beta = 0.0;
};

SingleApproximation single_approximation(const RelevantVectorSet& rv, const std::optional<HPrime>& h,
                                         const BoundOptions& opt = {});
// Same formula over explicit distances and per-facet xi values.
double single_approximation_beta(const std::vector<double>& a, const std::vector<double>& xi, bool modified);

// log10(r / (1 - r)) given r and 1 - r separately.
double log_odds(double r, double complement);
double log_odds(double r);

}  // namespace ambres
