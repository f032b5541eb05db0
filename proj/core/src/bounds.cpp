#include "ambres/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>

namespace ambres {

namespace {

const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

void check_facet(double a, double xi) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidInput, "distance must be positive");
  if (!(xi > 0.0 && xi <= 1.0)) throw Error(ErrorCode::InvalidInput, "xi must lie in (0, 1]");
}

// e^{-a^2 n^2 / 2} 4 sinh^2(y), arranged to avoid overflow for large y.
double excess_term(double a2, int n, double y) {
  const double base = -0.5 * a2 * n * n;
  if (y < 20.0) {
    const double s = std::sinh(y);
    return std::exp(base) * 4.0 * s * s;
  }
  const double t = -std::expm1(-2.0 * y);
  return std::exp(base + 2.0 * y) * t * t;
}

std::vector<FacetTerm> kept_facets(const RelevantVectorSet& rv, const BoundOptions& opt, int& dropped) {
  if (rv.distances.empty()) throw Error(ErrorCode::InvalidInput, "empty relevant-vector set");
  const double a_min = *std::min_element(rv.distances.begin(), rv.distances.end());
  std::vector<FacetTerm> out;
  dropped = 0;
  for (double a : rv.distances) {
    if (a > a_min + opt.facet_window) {
      ++dropped;
      continue;
    }
    FacetTerm f;
    f.a = a;
    out.push_back(f);
  }
  std::sort(out.begin(), out.end(), [](const FacetTerm& x, const FacetTerm& y) { return x.a < y.a; });
  return out;
}

RateBoundResult assemble(std::vector<FacetTerm> facets, const BoundOptions& opt, std::optional<HPrime> h,
                         int dropped) {
  RateBoundResult r;
  r.h_prime = h;
  r.dropped_facets = dropped;
  double log_prod = 0.0;
  double beta_sum = 0.0;
  for (auto& f : facets) {
    f.alpha = one_dim_success(f.a, f.xi);
    f.alpha_complement = std::erfc(f.a * f.xi * kInvSqrt2);
    f.beta = one_dim_error(f.a, f.xi, opt.modified);
    log_prod += std::log1p(-f.alpha_complement);
    beta_sum += f.beta;
  }
  const FacetTerm& fmin = facets.front();
  const double prod = std::exp(log_prod);
  const double prod_c = -std::expm1(log_prod);
  if (!h) {
    // Pi alpha_i >= 1 - sum beta_i always holds for MAP facets.
    const double union_c = std::min(1.0, beta_sum);
    r.alpha_lower = std::max(prod, 1.0 - union_c);
    r.alpha_lower_complement = std::min(prod_c, union_c);
  } else {
    r.alpha_lower = prod;
    r.alpha_lower_complement = prod_c;
  }
  r.alpha_upper = fmin.alpha;
  r.alpha_upper_complement = fmin.alpha_complement;
  r.beta_upper = beta_sum;
  double beta_min = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < facets.size(); ++i) {
    if (facets[i].beta > beta_min) {
      beta_min = facets[i].beta;
      arg = i;
    }
  }
  r.beta_lower = beta_min;
  if (opt.modified && h) {
    for (std::size_t i = 0; i < facets.size(); ++i) {
      if (i != arg) r.beta_lower *= facets[i].alpha;
    }
  }
  r.per_facet = std::move(facets);
  return r;
}

}  // namespace

double one_dim_success(double a, double xi) {
  check_facet(a, xi);
  return std::erf(a * xi * kInvSqrt2);
}

double one_dim_error(double a, double xi, bool modified) {
  check_facet(a, xi);
  const double tail = std::erfc(a * (1.0 - xi) * kInvSqrt2);
  if (!modified) return tail;
  return tail - std::erfc(a * (1.0 + xi) * kInvSqrt2);
}

double one_dim_complement(double a, double xi) {
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidInput, "distance must be positive");
  const double a2 = a * a;
  const int reach = static_cast<int>(std::ceil(10.0 / a)) + 2;
  double s0 = 1.0;
  double t = 0.0;
  for (int n = 1; n <= reach; ++n) {
    s0 += 2.0 * std::exp(-0.5 * a2 * n * n);
    t += excess_term(a2, n, 0.5 * a2 * n * xi);
  }
  return t / (s0 + t);
}

double xi_from_h(double a, const HPrime& h) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidInput, "distance must be positive");
  const double eps = h.complement;
  if (!(eps > 0.0) || !(h.value >= 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorCode::NoRoot, "threshold h' must be below 1");
  }
  if (eps >= one_dim_complement(a, 0.5)) return 0.5;
  auto f = [&](double t) { return one_dim_complement(a, std::exp(t)) - eps; };
  double lo = std::log(1e-300);
  const double hi = std::log(0.5);
  if (f(lo) > 0.0) throw Error(ErrorCode::NoRoot, "threshold is not attainable");
  std::uintmax_t iters = 200;
  const auto [t0, t1] =
      boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  if (iters >= 200) throw Error(ErrorCode::NoRoot, "root finder did not converge");
  return std::exp(0.5 * (t0 + t1));
}

RateBoundResult map_bounds(const RelevantVectorSet& rv, const BoundOptions& opt) {
  int dropped = 0;
  auto facets = kept_facets(rv, opt, dropped);
  BoundOptions map_opt = opt;
  map_opt.modified = false;  // at xi = 1/2 the MAP facet error is the full tail
  return assemble(std::move(facets), map_opt, std::nullopt, dropped);
}

RateBoundResult conditional_bounds(const RelevantVectorSet& rv, const HPrime& h, const BoundOptions& opt) {
  int dropped = 0;
  auto facets = kept_facets(rv, opt, dropped);
  for (auto& f : facets) f.xi = xi_from_h(f.a, h);
  return assemble(std::move(facets), opt, h, dropped);
}

double single_approximation_beta(const std::vector<double>& a, const std::vector<double>& xi, bool modified) {
  if (a.size() != xi.size() || a.empty()) throw Error(ErrorCode::DimensionMismatch, "facet lists differ");
  double log_prod = 0.0;
  std::vector<double> la(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    la[i] = std::log1p(-std::erfc(a[i] * xi[i] * kInvSqrt2));
    log_prod += la[i];
  }
  double beta = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    beta += one_dim_error(a[i], xi[i], modified) * std::exp(log_prod - la[i]);
  }
  return beta;
}

SingleApproximation single_approximation(const RelevantVectorSet& rv, const std::optional<HPrime>& h,
                                         const BoundOptions& opt) {
  const RateBoundResult b = h ? conditional_bounds(rv, *h, opt) : map_bounds(rv, opt);
  std::vector<double> a, xi;
  for (const auto& f : b.per_facet) {
    a.push_back(f.a);
    xi.push_back(f.xi);
  }
  SingleApproximation s;
  s.alpha = b.alpha_lower;
  s.alpha_complement = b.alpha_lower_complement;
  s.beta = single_approximation_beta(a, xi, h ? opt.modified : false);
  return s;
}

double log_odds(double r, double complement) { return std::log10(r) - std::log10(complement); }

double log_odds(double r) { return log_odds(r, 1.0 - r); }

}  // namespace ambres
