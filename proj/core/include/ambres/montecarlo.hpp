#pragma once

#include <cstdint>
#include <optional>

#include "ambres/bounds.hpp"
#include "ambres/decoder.hpp"
#include "ambres/optimize.hpp"
#include "ambres/voronoi.hpp"

namespace ambres {

enum class RateTarget { Alpha, Beta };
enum class McVariant { Plain, ImportanceV1, ImportanceV2Shifted };

const char* to_string(RateTarget t);
const char* to_string(McVariant v);

// Sampling inverse covariance M~ of the importance distribution.
struct ProposalForm {
  SpdForm form;

  static ProposalForm identity_of(const AmbiguityModel& model) { return ProposalForm{model.form()}; }
};

// Throws InvalidProposal unless M~ is positive definite and, when
// finite_variance is set, 2M - M~ is positive definite as well.
void validate_proposal(const AmbiguityModel& model, const ProposalForm& proposal, bool finite_variance);

struct RateEstimate {
  double value = 0.0;
  double std_error = 0.0;
  // Estimate of 1 - value from the complementary indicator; accurate when value ~ 1.
  double complement = 1.0;
  double complement_error = 0.0;
  std::int64_t samples = 0;
  std::int64_t hits = 0;
  std::uint64_t seed = 0;
  McVariant variant = McVariant::Plain;
  double truncation_estimate = 0.0;  // shifted variant: next-shell contribution

  double log_odds() const;
  double log_odds_error() const;
};

struct McOptions {
  int threads = 1;
  std::int64_t chunk = 1 << 16;
  double neighbor_window = 13.815510557964274;  // 2 ln(1e3) on the squared distance
};

RateEstimate mc_rate(const Decoder& decoder, const std::optional<HPrime>& h, RateTarget target,
                     const ProposalForm& proposal, std::int64_t n, std::uint64_t seed,
                     const McOptions& opt = {});
RateEstimate mc_rate(const AmbiguityModel& model, const std::optional<HPrime>& h, RateTarget target,
                     const ProposalForm& proposal, std::int64_t n, std::uint64_t seed,
                     const McOptions& opt = {});

// Error rate as a sum of shifted Gaussians integrated over the acceptance
// region of the origin (restricted to its N0 fundamental domain).
RateEstimate mc_rate_shifted(const Decoder& decoder, const HPrime& h, const RelevantVectorSet& rv,
                             const ProposalForm& proposal, std::int64_t n, std::uint64_t seed,
                             const McOptions& opt = {});

// Variance coefficient of the weighted error-rate estimator, with the
// normalized integral from the single approximation at distances a'_i.
double kappa(const AmbiguityModel& model, const ProposalForm& proposal, const std::optional<HPrime>& h,
             const RelevantVectorSet& rv, const BoundOptions& bopt = {});
double log_kappa(const AmbiguityModel& model, const ProposalForm& proposal, const std::optional<HPrime>& h,
                 const RelevantVectorSet& rv, const BoundOptions& bopt = {});

struct ProposalOptimization {
  ProposalForm proposal;
  double kappa_initial = 0.0;
  double kappa_final = 0.0;
  int iterations = 0;
};

ProposalOptimization optimize_proposal(const AmbiguityModel& model, const std::optional<HPrime>& h,
                                       const RelevantVectorSet& rv, const ProposalForm& init,
                                       RateTarget target = RateTarget::Beta, const BfgsOptions& opt = {},
                                       const BoundOptions& bopt = {});

// Gaussian whose p-sigma ellipsoid matches the small-threshold shape of the
// acceptance region, xi' Q xi <= 1 - h' with Q = sum_v u_v (Mv)(Mv)' / Z,
// plus M so it is never wider than the prior.
ProposalForm shifted_proposal(const AmbiguityModel& model, const HPrime& h, const RelevantVectorSet& rv);

}  // namespace ambres
