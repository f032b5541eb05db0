#include "ambres/hybrid.hpp"

#include <cmath>

namespace ambres {

const RateRow& HybridRate::selected() const {
  for (const RateRow& r : rows) {
    if (r.selected) return r;
  }
  throw Error(ErrorCode::InvalidInput, "no selected rate");
}

const RateRow* HybridRate::find(const std::string& method) const {
  for (const RateRow& r : rows) {
    if (r.method == method) return &r;
  }
  return nullptr;
}

RateRow rate_row(const std::string& method, const RateEstimate& e) {
  RateRow row;
  row.method = method;
  // Report the pair implied by the more accurate of the two estimates.
  row.value = e.complement < e.value ? 1.0 - e.complement : e.value;
  row.complement = 1.0 - row.value;
  if (e.complement < e.value) row.complement = e.complement;
  row.log_odds = e.log_odds();
  row.log_odds_error = e.log_odds_error();
  row.samples = e.samples;
  return row;
}

HybridRate hybrid_rate(const AmbiguityModel& model, const std::optional<HPrime>& h, const HybridOptions& opt) {
  HybridRate out;
  const Decoder decoder(model, opt.decoder);
  out.relevant = relevant_vectors(decoder, opt.voronoi_c);
  const RateBoundResult b = h ? conditional_bounds(out.relevant, *h, opt.bounds) : map_bounds(out.relevant, opt.bounds);

  RateRow lower{"bound-lower", b.alpha_lower, b.alpha_lower_complement,
                log_odds(b.alpha_lower, b.alpha_lower_complement)};
  RateRow upper{"bound-upper", b.alpha_upper, b.alpha_upper_complement,
                log_odds(b.alpha_upper, b.alpha_upper_complement)};
  const bool tight = upper.log_odds - lower.log_odds <= opt.gap_threshold;
  lower.selected = tight || opt.samples < 1;
  out.rows.push_back(lower);
  out.rows.push_back(upper);
  if (lower.selected) return out;

  ProposalForm proposal = ProposalForm::identity_of(model);
  if (lower.log_odds >= opt.plain_below) {
    try {
      proposal = optimize_proposal(model, h, out.relevant, proposal, RateTarget::Beta, {}, opt.bounds).proposal;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OptimizationDiverged) throw;
    }
  }
  const RateEstimate est = mc_rate(decoder, h, RateTarget::Alpha, proposal, opt.samples, opt.seed, opt.mc);
  RateRow mc = rate_row("mc-v1", est);
  mc.selected = true;
  out.rows.push_back(mc);
  return out;
}

}  // namespace ambres
