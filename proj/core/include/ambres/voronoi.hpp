#pragma once

#include <optional>
#include <vector>

#include "ambres/decoder.hpp"

namespace ambres {

// Voronoi-relevant vectors, one per +-pair (first nonzero entry positive),
// sorted by generalized distance a_i = sqrt(n_i' M n_i).
struct RelevantVectorSet {
  std::vector<IntVector> vectors;
  std::vector<double> distances;
  double a_min = 0.0;
  double threshold_c = 0.0;     // c in the search radius a_min^2 + c
  double threshold_sq = 0.0;    // squared radius actually searched
  int p_delta = 0;

  int size() const { return static_cast<int>(vectors.size()); }
};

// True iff the closed ellipsoid around n/2 with squared radius n'Mn/4 holds
// no lattice points besides 0 and n.
bool is_relevant(const SpdForm& m, const IntVector& n);
bool is_relevant(const ReducedForm& r, const IntVector& n);

// c defaults to 2 a_min^2 + 10. Vectors of the N0 sublattice are skipped.
RelevantVectorSet relevant_vectors(const AmbiguityModel& model, std::optional<double> c = std::nullopt,
                                   std::int64_t cap = 4'000'000);
RelevantVectorSet relevant_vectors(const Decoder& decoder, std::optional<double> c = std::nullopt,
                                   std::int64_t cap = 4'000'000);

// Facet list for a one-dimensional lattice with generalized distance a.
RelevantVectorSet single_facet(double a);

}  // namespace ambres
