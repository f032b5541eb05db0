#include "ambres/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

namespace ambres {

const char* to_string(RateTarget t) { return t == RateTarget::Alpha ? "alpha" : "beta"; }

const char* to_string(McVariant v) {
  switch (v) {
    case McVariant::Plain: return "plain";
    case McVariant::ImportanceV1: return "importance_v1";
    case McVariant::ImportanceV2Shifted: return "importance_v2_shifted";
  }
  return "unknown";
}

double RateEstimate::log_odds() const {
  // Importance-weighted value and complement need not sum to one; trust the smaller.
  if (complement < value) return ambres::log_odds(1.0 - complement, complement);
  return ambres::log_odds(value, 1.0 - value);
}

double RateEstimate::log_odds_error() const {
  const bool use_c = complement < value;
  const double v = use_c ? complement : value;
  const double err = use_c ? complement_error : std_error;
  return err / (v * (1.0 - v) * std::numbers::ln10);
}

void validate_proposal(const AmbiguityModel& model, const ProposalForm& proposal, bool finite_variance) {
  if (proposal.form.dim() != model.dim()) throw Error(ErrorCode::DimensionMismatch, "proposal size differs from model");
  try {
    cholesky(proposal.form);
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidProposal, "proposal is not positive definite");
  }
  if (finite_variance) {
    try {
      cholesky(SpdForm(2.0 * model.form().entries() - proposal.form.entries()));
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidProposal, "2M - proposal is not positive definite");
    }
  }
}

namespace {

struct Partial {
  double s1 = 0.0, s2 = 0.0;  // weighted indicator sums
  double c1 = 0.0, c2 = 0.0;  // complementary indicator sums
  double t1 = 0.0;            // truncation shell
  std::int64_t hits = 0;
};

struct Sampler {
  Matrix upper;        // L~^T, so xi = L~^{-T} z
  Matrix m;
  double log_norm = 0.0;  // (log|M| - log|M~|) / 2
  bool plain = false;
};

Sampler make_sampler(const AmbiguityModel& model, const ProposalForm& proposal) {
  Sampler s;
  const CholeskyFactor lt = cholesky(proposal.form);
  s.upper = lt.lower.transpose();
  s.m = model.form().entries();
  s.log_norm = 0.5 * (log_determinant(model.form()) - 2.0 * lt.lower.diagonal().array().log().sum());
  s.plain = proposal.form.entries() == model.form().entries();
  return s;
}

// Runs n samples in fixed-size chunks, each with its own generator seeded
// from (seed, chunk index); partial sums are reduced in chunk order.
template <class MakeState, class Body>
Partial run_chunks(std::int64_t n, std::uint64_t seed, const McOptions& opt, int dim, MakeState make_state,
                   Body body) {
  if (n < 1) throw Error(ErrorCode::InvalidInput, "sample count must be positive");
  const std::int64_t chunk = std::max<std::int64_t>(1, opt.chunk);
  const std::int64_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<Partial> parts(n_chunks);
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    auto state = make_state();
    Vector z(dim);
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= n_chunks) break;
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal;
      const std::int64_t count = std::min(chunk, n - c * chunk);
      Partial& p = parts[c];
      for (std::int64_t i = 0; i < count; ++i) {
        for (int k = 0; k < dim; ++k) z(k) = normal(rng);
        body(z, *state, p);
      }
    }
  };
  const int threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(n_chunks)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  Partial total;
  for (const auto& p : parts) {
    total.s1 += p.s1;
    total.s2 += p.s2;
    total.c1 += p.c1;
    total.c2 += p.c2;
    total.t1 += p.t1;
    total.hits += p.hits;
  }
  return total;
}

void finish(RateEstimate& r, const Partial& p, std::int64_t n) {
  const double nn = static_cast<double>(n);
  r.samples = n;
  r.hits = p.hits;
  r.value = p.s1 / nn;
  r.complement = p.c1 / nn;
  auto se = [&](double s1, double s2) {
    if (n < 2) return 0.0;
    const double var = std::max(0.0, (s2 - s1 * s1 / nn) / (nn - 1.0));
    return std::sqrt(var / nn);
  };
  r.std_error = se(p.s1, p.s2);
  r.complement_error = se(p.c1, p.c2);
  r.truncation_estimate = p.t1 / nn;
}

double log_erfc(double x) {
  if (x < 26.0) return std::log(std::erfc(x));
  const double x2 = x * x;
  return -x2 - std::log(x * std::sqrt(std::numbers::pi)) + std::log1p(-0.5 / x2 + 0.75 / (x2 * x2));
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// log of the single-approximation error rate over facets (a_i, xi_i).
double log_single_beta(const std::vector<double>& a, const std::vector<double>& xi, bool modified) {
  const double r2 = 1.0 / std::numbers::sqrt2;
  std::vector<double> la(a.size()), lb(a.size());
  double total_la = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    la[i] = std::log1p(-std::erfc(a[i] * xi[i] * r2));
    total_la += la[i];
    const double lu = log_erfc(a[i] * (1.0 - xi[i]) * r2);
    if (modified) {
      const double lv = log_erfc(a[i] * (1.0 + xi[i]) * r2);
      lb[i] = lu + std::log1p(-std::exp(lv - lu));
    } else {
      lb[i] = lu;
    }
  }
  std::vector<double> terms(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) terms[i] = lb[i] + total_la - la[i];
  return log_sum_exp(terms);
}

}  // namespace

RateEstimate mc_rate(const Decoder& decoder, const std::optional<HPrime>& h, RateTarget target,
                     const ProposalForm& proposal, std::int64_t n, std::uint64_t seed, const McOptions& opt) {
  const AmbiguityModel& model = decoder.model();
  validate_proposal(model, proposal, false);
  const Sampler s = make_sampler(model, proposal);
  const int d = model.dim();
  RateEstimate r;
  r.seed = seed;
  r.variant = s.plain ? McVariant::Plain : McVariant::ImportanceV1;

  struct State {
    std::shared_ptr<Decoder::Workspace> ws;
    Vector xi;
  };
  auto make_state = [&] { return std::make_unique<State>(State{decoder.workspace(), Vector(d)}); };
  auto body = [&](const Vector& z, State& st, Partial& p) {
    st.xi.noalias() = s.upper.triangularView<Eigen::Upper>().solve(z);
    double w = 1.0;
    if (!s.plain) w = std::exp(s.log_norm - 0.5 * st.xi.dot(s.m * st.xi) + 0.5 * z.squaredNorm());
    const Verdict v = decoder.classify(st.xi, h, *st.ws);
    const bool success = v.winner_is_origin && v.accepted;
    const bool error = !v.winner_is_origin && v.accepted;
    const bool hit = target == RateTarget::Alpha ? success : error;
    if (hit) {
      ++p.hits;
      p.s1 += w;
      p.s2 += w * w;
    } else {
      p.c1 += w;
      p.c2 += w * w;
    }
  };
  finish(r, run_chunks(n, seed, opt, d, make_state, body), n);
  return r;
}

RateEstimate mc_rate(const AmbiguityModel& model, const std::optional<HPrime>& h, RateTarget target,
                     const ProposalForm& proposal, std::int64_t n, std::uint64_t seed, const McOptions& opt) {
  return mc_rate(Decoder(model), h, target, proposal, n, seed, opt);
}

RateEstimate mc_rate_shifted(const Decoder& decoder, const HPrime& h, const RelevantVectorSet& rv,
                             const ProposalForm& proposal, std::int64_t n, std::uint64_t seed,
                             const McOptions& opt) {
  const AmbiguityModel& model = decoder.model();
  validate_proposal(model, proposal, false);
  if (rv.vectors.empty()) throw Error(ErrorCode::EmptyNeighborSet, "no relevant vectors");
  const int d = model.dim();
  const int pd = model.p_delta();
  const Sampler s = make_sampler(model, proposal);

  // Neighbor centers: lattice points outside the N0 sublattice within
  // a_min^2 + k * window. k grows until a pilot run shows the next shell
  // adding at most kShellTolerance of the estimate; that shell then gives
  // the truncation estimate.
  constexpr int kMaxShells = 8;
  constexpr double kShellTolerance = 1e-3;
  const double a2 = rv.a_min * rv.a_min;
  Matrix mn_near, mn_far;
  Vector d_near, d_far;
  auto split = [&](const std::vector<LatticePoint>& pts, double inner) {
    std::vector<int> near, far;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      if (pts[i].n.head(pd).isZero()) continue;
      (pts[i].distance_sq <= inner ? near : far).push_back(i);
    }
    if (near.empty()) throw Error(ErrorCode::EmptyNeighborSet, "no lattice points within the neighbor window");
    auto pack = [&](const std::vector<int>& idx, Matrix& mn, Vector& dn) {
      mn.resize(d, static_cast<Eigen::Index>(idx.size()));
      dn.resize(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const Vector v = pts[idx[k]].n.cast<double>();
        mn.col(k) = s.m * v;
        dn(k) = v.dot(mn.col(k));
      }
    };
    pack(near, mn_near, d_near);
    pack(far, mn_far, d_far);
  };

  struct State {
    std::shared_ptr<Decoder::Workspace> ws;
    Vector xi, e;
  };
  auto make_state = [&] { return std::make_unique<State>(State{decoder.workspace(), Vector(d), Vector()}); };
  auto body = [&](const Vector& z, State& st, Partial& p) {
    st.xi.noalias() = s.upper.triangularView<Eigen::Upper>().solve(z);
    const Verdict v = decoder.classify(st.xi, h, *st.ws);
    if (!(v.best_is_origin && v.accepted)) return;
    const double base = s.log_norm - 0.5 * st.xi.dot(s.m * st.xi) + 0.5 * z.squaredNorm();
    auto shell = [&](const Matrix& mn, const Vector& dn) {
      if (dn.size() == 0) return 0.0;
      st.e.noalias() = mn.transpose() * st.xi;
      return (base + st.e.array() - 0.5 * dn.array()).exp().sum();
    };
    const double w = shell(mn_near, d_near);
    ++p.hits;
    p.s1 += w;
    p.s2 += w * w;
    p.t1 += shell(mn_far, d_far);
  };

  const std::int64_t pilot = std::min<std::int64_t>(n, 20000);
  for (int k = 1;; ++k) {
    std::vector<LatticePoint> pts;
    try {
      pts = decoder.enumerate(Vector::Zero(d), a2 + (k + 1) * opt.neighbor_window, 4'000'000);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CapacityExceeded || k == 1) throw;
      break;  // keep the previous split
    }
    split(pts, a2 + k * opt.neighbor_window);
    if (k == kMaxShells) break;
    const Partial p = run_chunks(pilot, seed ^ 0x9e3779b97f4a7c15ULL, opt, d, make_state, body);
    if (p.t1 <= kShellTolerance * p.s1) break;
  }

  RateEstimate r;
  r.seed = seed;
  r.variant = McVariant::ImportanceV2Shifted;
  finish(r, run_chunks(n, seed, opt, d, make_state, body), n);
  r.complement = std::numeric_limits<double>::quiet_NaN();
  r.complement_error = std::numeric_limits<double>::quiet_NaN();
  return r;
}

double log_kappa(const AmbiguityModel& model, const ProposalForm& proposal, const std::optional<HPrime>& h,
                 const RelevantVectorSet& rv, const BoundOptions& bopt) {
  validate_proposal(model, proposal, true);
  if (rv.vectors.empty()) throw Error(ErrorCode::EmptyNeighborSet, "no relevant vectors");
  const Matrix& m = model.form().entries();
  const SpdForm k(2.0 * m - proposal.form.entries());
  const CholeskyFactor lk = cholesky(k);
  const double log_pref =
      log_determinant(model.form()) - 0.5 * log_determinant(proposal.form) - 0.5 * log_determinant(k);
  std::vector<double> a, xi;
  const double a_min = rv.a_min > 0.0 ? rv.a_min : rv.distances.front();
  for (std::size_t i = 0; i < rv.vectors.size(); ++i) {
    if (rv.distances[i] > a_min + bopt.facet_window) continue;
    const Vector n = rv.vectors[i].cast<double>();
    if (n.size() != model.dim()) throw Error(ErrorCode::DimensionMismatch, "relevant vector size differs from model");
    const Vector mn = m * n;
    const Vector y = lk.lower.triangularView<Eigen::Lower>().solve(mn);
    a.push_back(n.dot(mn) / y.norm());
    xi.push_back(h ? xi_from_h(rv.distances[i], *h) : 0.5);
  }
  return log_pref + log_single_beta(a, xi, h ? bopt.modified : false);
}

double kappa(const AmbiguityModel& model, const ProposalForm& proposal, const std::optional<HPrime>& h,
             const RelevantVectorSet& rv, const BoundOptions& bopt) {
  return std::exp(log_kappa(model, proposal, h, rv, bopt));
}

ProposalOptimization optimize_proposal(const AmbiguityModel& model, const std::optional<HPrime>& h,
                                       const RelevantVectorSet& rv, const ProposalForm& init, RateTarget target,
                                       const BfgsOptions& opt, const BoundOptions& bopt) {
  if (target == RateTarget::Alpha) {
    throw Error(ErrorCode::Unsupported, "proposal optimization is defined for error-rate targets only");
  }
  validate_proposal(model, init, true);
  const int d = model.dim();
  // Whitened parameters: M~ = L S L^T with L L^T = M, so the feasible set
  // 0 < S < 2I is the same for every model.
  const Matrix l = cholesky(model.form()).lower;
  const Matrix s0 = l.triangularView<Eigen::Lower>().solve(
      Matrix(l.triangularView<Eigen::Lower>().solve(init.form.entries()).transpose()));
  const int np = d * (d + 1) / 2;
  auto to_matrix = [&](const Vector& t) {
    Matrix s(d, d);
    int k = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) s(i, j) = s(j, i) = t(k++);
    return s;
  };
  Vector t0(np);
  {
    int k = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) t0(k++) = 0.5 * (s0(i, j) + s0(j, i));
  }
  const Matrix id = Matrix::Identity(d, d);
  constexpr double kBarrier = 1e-6;
  auto objective = [&](const Vector& t) {
    const Matrix s = to_matrix(t);
    Eigen::LLT<Matrix> c1(s), c2(2.0 * id - s);
    if (c1.info() != Eigen::Success || c2.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const double b1 = c1.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double b2 = c2.matrixL().toDenseMatrix().diagonal().array().log().sum();
    if (!std::isfinite(b1) || !std::isfinite(b2)) return std::numeric_limits<double>::infinity();
    const Matrix mt = l * s * l.transpose();
    try {
      return log_kappa(model, ProposalForm{SpdForm(0.5 * (mt + mt.transpose()))}, h, rv, bopt) -
             kBarrier * (b1 + b2);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  ProposalOptimization out;
  out.kappa_initial = kappa(model, init, h, rv, bopt);
  const BfgsResult res = bfgs_minimize(objective, t0, opt);
  out.iterations = res.iterations;
  const Matrix mt = l * to_matrix(res.x) * l.transpose();
  ProposalForm cand{SpdForm(0.5 * (mt + mt.transpose()))};
  const double kc = kappa(model, cand, h, rv, bopt);
  if (kc <= out.kappa_initial) {
    out.proposal = cand;
    out.kappa_final = kc;
  } else {
    if (!res.converged) throw Error(ErrorCode::OptimizationDiverged, "no descent within the iteration limit");
    out.proposal = init;
    out.kappa_final = out.kappa_initial;
  }
  return out;
}

ProposalForm shifted_proposal(const AmbiguityModel& model, const HPrime& h, const RelevantVectorSet& rv) {
  if (rv.vectors.empty()) throw Error(ErrorCode::EmptyNeighborSet, "no relevant vectors");
  if (!(h.complement > 0.0)) throw Error(ErrorCode::InvalidInput, "threshold must be below one");
  const Matrix& m = model.form().entries();
  const int d = model.dim();
  double z = 1.0;
  for (const auto& a : rv.distances) z += 2.0 * std::exp(-0.5 * a * a);
  // Each +-v pair adds 2 u_v (Mv)(Mv)'; scaled by p / (1 - h') in logs.
  const double log_scale = std::log(2.0 * d / z) - std::log(h.complement);
  Matrix mt = m;
  for (std::size_t i = 0; i < rv.vectors.size(); ++i) {
    const Vector mv = m * rv.vectors[i].cast<double>();
    const double a = rv.distances[i];
    mt.noalias() += std::exp(log_scale - 0.5 * a * a) * mv * mv.transpose();
  }
  return ProposalForm{SpdForm(0.5 * (mt + mt.transpose()))};
}

}  // namespace ambres
