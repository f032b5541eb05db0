#include "ambres/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

namespace ambres {

const char* to_string(Separability s) {
  switch (s) {
    case Separability::Separable: return "separable";
    case Separability::Intermediate: return "intermediate";
    case Separability::Nonseparable: return "nonseparable";
  }
  return "unknown";
}

AmbiguityModel::AmbiguityModel(SpdForm form, int p, int p0, Separability separability, int n0_dim)
    : form_(std::move(form)), p_(p), p0_(p0), separability_(separability), n0_dim_(n0_dim) {
  if (n0_dim_ < 0 || n0_dim_ >= form_.dim()) {
    throw Error(ErrorCode::InvalidInput, "N0 block must leave at least one decided coordinate");
  }
  if (p0_ < 0 || p_ < p_delta()) throw Error(ErrorCode::InvalidInput, "inconsistent model sizes");
  if ((n0_dim_ == 0) != (separability_ == Separability::Separable)) {
    throw Error(ErrorCode::InvalidInput, "separability flag disagrees with the N0 block size");
  }
}

AmbiguityModel AmbiguityModel::separable(SpdForm form, int p, int p0) {
  const int d = form.dim();
  return AmbiguityModel(std::move(form), p < 0 ? d : p, p0, Separability::Separable, 0);
}

AmbiguityModel AmbiguityModel::nonseparable(SpdForm form, int n0_dim, int p0) {
  const int d = form.dim();
  return AmbiguityModel(std::move(form), d, p0 < 0 ? n0_dim : p0, Separability::Nonseparable, n0_dim);
}

IntMatrix AmbiguityModel::n0_basis() const {
  IntMatrix b = IntMatrix::Zero(dim(), n0_dim_);
  for (int j = 0; j < n0_dim_; ++j) b(p_delta() + j, j) = 1;
  return b;
}

HPrime HPrime::from_value(double h) {
  if (!(h >= 0.0 && h <= 1.0)) throw Error(ErrorCode::InvalidInput, "h' must lie in [0, 1]");
  return HPrime{h, 1.0 - h};
}

HPrime HPrime::from_log_odds(double l) {
  if (!std::isfinite(l)) throw Error(ErrorCode::InvalidInput, "log-odds must be finite");
  const double t = std::pow(10.0, -std::abs(l));
  const double small = t / (1.0 + t);
  return l >= 0 ? HPrime{1.0 / (1.0 + t), small} : HPrime{small, 1.0 / (1.0 + t)};
}

double HPrime::log_odds() const { return std::log10(value) - std::log10(complement); }

namespace {

constexpr double kTie = 1e-12;          // log-posterior tie tolerance
constexpr double kThetaCut = 80.0;      // squared-distance cutoff inside N0 sums
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Frame {
  std::vector<double> center, dist;
  std::vector<std::int64_t> x, base, k, sgn;

  void resize(int n) {
    center.assign(n, 0.0);
    dist.assign(n + 1, 0.0);
    x.assign(n, 0);
    base.assign(n, 0);
    k.assign(n, 0);
    sgn.assign(n, 1);
  }
};

// Depth-first Schnorr-Euchner search over the first `levels` rows of the
// lower-triangular factor r. The leaf callback returns the new squared bound.
template <class Leaf>
std::int64_t descend(const Matrix& r, const double* nu, int levels, double bound, Frame& f, Leaf&& leaf) {
  std::int64_t nodes = 0;
  auto start = [&](int i) {
    double s = 0.0;
    for (int j = 0; j < i; ++j) s += r(i, j) * (static_cast<double>(f.x[j]) - nu[j]);
    const double c = nu[i] - s / r(i, i);
    if (!(std::abs(c) < 1e15)) throw Error(ErrorCode::IntegerOverflow, "search center out of range");
    const double b = std::nearbyint(c);
    f.center[i] = c;
    f.base[i] = static_cast<std::int64_t>(b);
    f.x[i] = f.base[i];
    f.k[i] = 0;
    f.sgn[i] = c >= b ? 1 : -1;
  };
  auto next = [&](int i) {
    const std::int64_t k = ++f.k[i];
    const std::int64_t off = (k & 1) ? f.sgn[i] * ((k + 1) / 2) : -f.sgn[i] * (k / 2);
    f.x[i] = f.base[i] + off;
  };

  int i = 0;
  f.dist[0] = 0.0;
  start(0);
  for (;;) {
    const double diff = static_cast<double>(f.x[i]) - f.center[i];
    const double q = f.dist[i] + r(i, i) * r(i, i) * diff * diff;
    ++nodes;
    if (q <= bound) {
      if (i + 1 == levels) {
        bound = leaf(f.x, q);
        next(i);
      } else {
        f.dist[i + 1] = q;
        ++i;
        start(i);
      }
    } else {
      if (i == 0) break;
      --i;
      next(i);
    }
  }
  return nodes;
}

bool lex_less(const IntVector& a, const IntVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return false;
}

IntVector to_int(const std::vector<std::int64_t>& x, int n) {
  IntVector v(n);
  for (int i = 0; i < n; ++i) v(i) = x[i];
  return v;
}

IntVector babai_impl(const Matrix& r, const UnimodularTransform& t, const Vector& nu) {
  const int d = static_cast<int>(r.rows());
  if (nu.size() != d) throw Error(ErrorCode::DimensionMismatch, "float solution length differs from form size");
  const Vector nu_s = t.apply(nu);
  Frame f;
  f.resize(d);
  IntVector out(d);
  descend(r, nu_s.data(), d, kInf, f, [&](const std::vector<std::int64_t>& x, double) {
    out = to_int(x, d);
    return -1.0;
  });
  return t.apply_inverse(out);
}

LatticePoint closest_impl(const Matrix& r, const UnimodularTransform& t, const Vector& nu, SearchStats* stats) {
  const int d = static_cast<int>(r.rows());
  if (nu.size() != d) throw Error(ErrorCode::DimensionMismatch, "float solution length differs from form size");
  const Vector nu_s = t.apply(nu);
  Frame f;
  f.resize(d);
  LatticePoint best;
  double best_q = kInf;
  const std::int64_t nodes = descend(r, nu_s.data(), d, kInf, f, [&](const std::vector<std::int64_t>& x, double q) {
    const double tol = 2.0 * kTie * std::max(1.0, q);
    if (best.n.size() == 0 || q < best_q - tol) {
      best.n = t.apply_inverse(to_int(x, d));
      best_q = q;
      if (stats) stats->radii.push_back(q);
    } else if (q <= best_q + tol) {
      IntVector cand = t.apply_inverse(to_int(x, d));
      if (lex_less(cand, best.n)) best.n = std::move(cand);
    }
    return best_q + 2.0 * kTie * std::max(1.0, best_q);
  });
  best.distance_sq = best_q;
  if (stats) stats->visited_nodes += nodes;
  return best;
}

std::vector<LatticePoint> enumerate_impl(const Matrix& r, const UnimodularTransform& t, const Vector& nu,
                                         double chi_sq, std::int64_t cap) {
  const int d = static_cast<int>(r.rows());
  if (nu.size() != d) throw Error(ErrorCode::DimensionMismatch, "float solution length differs from form size");
  if (!(chi_sq > 0.0) || !std::isfinite(chi_sq)) throw Error(ErrorCode::InvalidInput, "radius must be positive");
  const Vector nu_s = t.apply(nu);
  Frame f;
  f.resize(d);
  std::vector<LatticePoint> out;
  descend(r, nu_s.data(), d, chi_sq, f, [&](const std::vector<std::int64_t>& x, double q) {
    if (static_cast<std::int64_t>(out.size()) >= cap) {
      throw Error(ErrorCode::CapacityExceeded, "enumeration exceeds " + std::to_string(cap) + " points");
    }
    out.push_back(LatticePoint{t.apply_inverse(to_int(x, d)), q});
    return chi_sq;
  });
  std::sort(out.begin(), out.end(), [](const LatticePoint& a, const LatticePoint& b) {
    if (a.distance_sq != b.distance_sq) return a.distance_sq < b.distance_sq;
    return lex_less(a.n, b.n);
  });
  return out;
}

}  // namespace

struct Decoder::Workspace {
  Frame outer, inner;
  Vector nu_s, mu, delta, e;
  std::vector<std::int64_t> tail;
  std::vector<double> inner_q;
  struct Hit {
    std::vector<std::int64_t> prefix, tail;
    double log_weight;
    double q_full;
  };
  std::vector<Hit> hits;
};

struct Decoder::ClassBest {
  std::vector<std::int64_t> prefix, tail;
  double log_weight = -kInf;
  double q_delta = 0.0;
  double tail_q = 0.0;
  bool found = false;
  std::int64_t nodes = 0;
};

// One representative per +-pair of the short lattice vectors at nu = 0,
// split by membership in the N0 sublattice, stored as M' v columns.
struct Decoder::Neighbors {
  double radius_sq = 0.0;
  Matrix mv_out, mv_in;
  Vector u_out, u_in;
};

struct Decoder::NeighborCache {
  std::once_flag once;
  std::unique_ptr<Decoder::Neighbors> table;
};

Decoder::Decoder(AmbiguityModel model, DecoderOptions options)
    : model_(std::move(model)), options_(options) {
  if (!(options_.c > 0.0)) throw Error(ErrorCode::InvalidInput, "truncation constant must be positive");
  const int d = model_.dim();
  const int pd = model_.p_delta();
  const int k0 = model_.n0_dim();
  std::optional<int> boundary;
  if (k0 > 0) boundary = pd;
  reduced_ = options_.reduce ? lll_reduce(model_.form(), options_.lll_delta, boundary)
                             : identity_reduction(model_.form(), boundary);
  r_ = reduced_.layers;
  r00_ = r_.bottomRightCorner(k0, k0);
  zinv_dd_ = reduced_.transform.inverse().topLeftCorner(pd, pd);
  if (k0 > 0 && reduced_.transform.inverse().topRightCorner(pd, k0).cwiseAbs().maxCoeff() != 0) {
    throw Error(ErrorCode::InvalidInput, "reduction mixed the N0 block into Delta N");
  }
  zd_ = reduced_.transform.matrix().cast<double>();
  cache_ = std::make_shared<NeighborCache>();

  auto ws = workspace();
  Vector zero = Vector::Zero(d);
  std::vector<std::int64_t> origin(d, 0);
  log_theta0_ = log_theta(zero, origin, *ws, nullptr, nullptr);

  double bound = kInf;
  for (int i = 0; i < pd; ++i) bound = std::min(bound, reduced_.reduced(i, i));
  a_min_sq_ = bound;
  descend(r_, zero.data(), d, bound * (1.0 + 1e-12), ws->outer, [&](const std::vector<std::int64_t>& x, double q) {
    bool in_l0 = true;
    for (int i = 0; i < pd; ++i) in_l0 = in_l0 && x[i] == 0;
    if (!in_l0 && q < a_min_sq_) a_min_sq_ = q;
    return a_min_sq_ * (1.0 + 1e-12);
  });

  collect_classes(zero, a_min_sq_ + options_.c, *ws);
  b0_ = std::exp(log_theta0_);
  a0_ = 0.0;
  for (const auto& h : ws->hits) {
    const bool zero_class = std::all_of(h.prefix.begin(), h.prefix.end(), [](std::int64_t v) { return v == 0; });
    if (!zero_class) a0_ += std::exp(h.log_weight);
  }
}

Decoder::~Decoder() = default;
Decoder::Decoder(Decoder&&) noexcept = default;
Decoder& Decoder::operator=(Decoder&&) noexcept = default;

double Decoder::h0() const { return b0_ / (a0_ + b0_); }

std::shared_ptr<Decoder::Workspace> Decoder::workspace() const {
  auto ws = std::make_shared<Workspace>();
  const int d = model_.dim();
  ws->outer.resize(d);
  ws->inner.resize(std::max(1, model_.n0_dim()));
  ws->nu_s.resize(d);
  ws->mu.resize(model_.n0_dim());
  ws->delta.resize(d);
  ws->tail.assign(model_.n0_dim(), 0);
  return ws;
}

Vector Decoder::to_search(const Vector& nu) const {
  if (nu.size() != model_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "float solution length differs from model size");
  }
  return reduced_.transform.apply(nu);
}

IntVector Decoder::delta_from_prefix(const std::vector<std::int64_t>& x) const {
  const int pd = model_.p_delta();
  IntVector out(pd);
  for (int i = 0; i < pd; ++i) {
    std::int64_t s = 0;
    for (int j = 0; j <= pd - 1; ++j) s += zinv_dd_(i, j) * x[j];
    out(i) = s;
  }
  return out;
}

bool Decoder::prefix_less(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) const {
  return lex_less(delta_from_prefix(a), delta_from_prefix(b));
}

double Decoder::log_theta(const Vector& nu_s, const std::vector<std::int64_t>& x, Workspace& ws,
                          double* tail_q, std::vector<std::int64_t>* tail) const {
  const int k0 = model_.n0_dim();
  if (k0 == 0) {
    if (tail_q) *tail_q = 0.0;
    return 0.0;
  }
  const int pd = model_.p_delta();
  // Center of the N0 block given the decided prefix: R00 (y - mu) is the residual.
  for (int t = 0; t < k0; ++t) {
    double b = 0.0;
    for (int j = 0; j < pd; ++j) b += r_(pd + t, j) * (static_cast<double>(x[j]) - nu_s[j]);
    for (int s = 0; s < t; ++s) b += r00_(t, s) * (ws.mu[s] - nu_s[pd + s]);
    ws.mu[t] = nu_s[pd + t] - b / r00_(t, t);
  }

  if (k0 == 1) {
    const double w = r00_(0, 0) * r00_(0, 0);
    const double m = ws.mu[0];
    const double n0 = std::nearbyint(m);
    const double qmin = w * (n0 - m) * (n0 - m);
    if (tail_q) *tail_q = qmin;
    if (tail) (*tail)[0] = static_cast<std::int64_t>(n0);
    if (w >= 2.0 * std::numbers::pi) {
      const int reach = static_cast<int>(std::ceil(std::sqrt(kThetaCut / w))) + 1;
      double s = 0.0;
      for (int k = -reach; k <= reach; ++k) {
        const double dn = n0 + k - m;
        s += std::exp(-0.5 * (w * dn * dn - qmin));
      }
      return -0.5 * qmin + std::log(s);
    }
    // Poisson-dual series converges fastest for a weak N0 direction.
    double s = 1.0;
    for (int k = 1;; ++k) {
      const double expo = 2.0 * std::numbers::pi * std::numbers::pi * k * k / w;
      if (expo > 45.0) break;
      s += 2.0 * std::exp(-expo) * std::cos(2.0 * std::numbers::pi * k * m);
    }
    return 0.5 * std::log(2.0 * std::numbers::pi / w) + std::log(s);
  }

  ws.inner_q.clear();
  double qmin = kInf;
  descend(r00_, ws.mu.data(), k0, kInf, ws.inner, [&](const std::vector<std::int64_t>& y, double q) {
    ws.inner_q.push_back(q);
    if (q < qmin) {
      qmin = q;
      if (tail) std::copy(y.begin(), y.begin() + k0, tail->begin());
    }
    return qmin + kThetaCut;
  });
  double s = 0.0;
  for (double q : ws.inner_q) {
    if (q <= qmin + kThetaCut) s += std::exp(-0.5 * (q - qmin));
  }
  if (tail_q) *tail_q = qmin;
  return -0.5 * qmin + std::log(s);
}

void Decoder::best_class(const Vector& nu_s, Workspace& ws, ClassBest& out) const {
  const int pd = model_.p_delta();
  out.found = false;
  out.log_weight = -kInf;
  out.prefix.resize(pd);
  out.tail.resize(model_.n0_dim());
  out.nodes = descend(r_, nu_s.data(), pd, kInf, ws.outer, [&](const std::vector<std::int64_t>& x, double q) {
    double tq = 0.0;
    const double lw = -0.5 * q + log_theta(nu_s, x, ws, &tq, &ws.tail);
    bool take = !out.found || lw > out.log_weight + kTie;
    if (!take && lw >= out.log_weight - kTie) take = prefix_less(x, out.prefix);
    if (take) {
      out.found = true;
      out.log_weight = lw;
      out.q_delta = q;
      out.tail_q = tq;
      std::copy(x.begin(), x.begin() + pd, out.prefix.begin());
      out.tail = ws.tail;
    }
    return 2.0 * (log_theta0_ - out.log_weight) + 4.0 * kTie;
  });
}

void Decoder::collect_classes(const Vector& nu_s, double window, Workspace& ws) const {
  const int pd = model_.p_delta();
  ws.hits.clear();
  double best = -kInf;
  descend(r_, nu_s.data(), pd, kInf, ws.outer, [&](const std::vector<std::int64_t>& x, double q) {
    double tq = 0.0;
    const double lw = -0.5 * q + log_theta(nu_s, x, ws, &tq, &ws.tail);
    if (lw >= best - 0.5 * window) {
      if (static_cast<std::int64_t>(ws.hits.size()) >= options_.capacity) {
        throw Error(ErrorCode::CapacityExceeded,
                    "posterior support exceeds " + std::to_string(options_.capacity) + " classes");
      }
      ws.hits.push_back({std::vector<std::int64_t>(x.begin(), x.begin() + pd), ws.tail, lw, q + tq});
      best = std::max(best, lw);
    }
    return 2.0 * (log_theta0_ - best) + window;
  });
  std::erase_if(ws.hits, [&](const Workspace::Hit& h) { return h.log_weight < best - 0.5 * window; });
}

const Decoder::Neighbors* Decoder::neighbors() const {
  std::call_once(cache_->once, [this] {
    const int d = model_.dim();
    const int pd = model_.p_delta();
    const double root = 1.0 + std::sqrt(1.0 + a_min_sq_ + options_.c);
    const double radius_sq = root * root;
    std::vector<std::pair<std::vector<std::int64_t>, double>> pts;
    Frame f;
    f.resize(d);
    const Vector zero = Vector::Zero(d);
    try {
      descend(r_, zero.data(), d, radius_sq, f, [&](const std::vector<std::int64_t>& x, double q) {
        int lead = 0;
        while (lead < d && x[lead] == 0) ++lead;
        if (lead < d && x[lead] > 0) {
          if (static_cast<std::int64_t>(pts.size()) >= options_.neighbor_capacity) {
            throw Error(ErrorCode::CapacityExceeded, "neighbor table");
          }
          pts.emplace_back(std::vector<std::int64_t>(x.begin(), x.begin() + d), q);
        }
        return radius_sq;
      });
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CapacityExceeded) throw;
      return;
    }
    auto t = std::make_unique<Neighbors>();
    t->radius_sq = radius_sq;
    int n_in = 0;
    for (const auto& [x, q] : pts) {
      bool in_l0 = true;
      for (int i = 0; i < pd; ++i) in_l0 = in_l0 && x[i] == 0;
      n_in += in_l0;
    }
    const int n_out = static_cast<int>(pts.size()) - n_in;
    t->mv_out.resize(d, n_out);
    t->mv_in.resize(d, n_in);
    t->u_out.resize(n_out);
    t->u_in.resize(n_in);
    int io = 0, ii = 0;
    const Matrix& m = reduced_.reduced.entries();
    for (const auto& [x, q] : pts) {
      Vector v(d);
      for (int i = 0; i < d; ++i) v(i) = static_cast<double>(x[i]);
      bool in_l0 = true;
      for (int i = 0; i < pd; ++i) in_l0 = in_l0 && x[i] == 0;
      if (in_l0) {
        t->mv_in.col(ii) = m * v;
        t->u_in(ii++) = std::exp(-0.5 * q);
      } else {
        t->mv_out.col(io) = m * v;
        t->u_out(io++) = std::exp(-0.5 * q);
      }
    }
    cache_->table = std::move(t);
  });
  return cache_->table.get();
}

double Decoder::complement_of(const Vector& nu_s, const ClassBest& best, Workspace& ws) const {
  const int d = model_.dim();
  const int pd = model_.p_delta();
  const double d2 = best.q_delta + best.tail_q;
  const Neighbors* nb = neighbors();
  const double reach = std::sqrt(d2) + std::sqrt(d2 + a_min_sq_ + options_.c);
  if (nb && reach * reach <= nb->radius_sq) {
    // Pair the +-v terms around the best point P: with E = v' M (nu - P), each
    // pair contributes u (2 + 4 sinh^2(E/2)), and only the sinh^2 excess moves
    // the class sums away from their nu = P values.
    for (int i = 0; i < pd; ++i) ws.delta(i) = nu_s(i) - static_cast<double>(best.prefix[i]);
    for (int i = pd; i < d; ++i) ws.delta(i) = nu_s(i) - static_cast<double>(best.tail[i - pd]);
    auto excess = [&](const Matrix& mv, const Vector& u) {
      if (u.size() == 0) return 0.0;
      ws.e.noalias() = mv.transpose() * ws.delta;
      return 4.0 * (u.array() * (0.5 * ws.e.array()).sinh().square()).sum();
    };
    const double da = excess(nb->mv_out, nb->u_out);
    const double db = excess(nb->mv_in, nb->u_in);
    return (da * b0_ - a0_ * db) / (b0_ * (a0_ + da + b0_ + db));
  }
  collect_classes(nu_s, a_min_sq_ + options_.c, ws);
  double top = -kInf;
  for (const auto& h : ws.hits) top = std::max(top, h.log_weight);
  double a = 0.0;
  bool seen_top = false;
  for (const auto& h : ws.hits) {
    if (h.log_weight == top && !seen_top) {
      seen_top = true;
      continue;
    }
    a += std::exp(h.log_weight - top);
  }
  const double rho0 = a0_ / b0_;
  return (a - rho0) / (a + 1.0);
}

DecisionOutcome Decoder::outcome(const Vector& nu, const std::optional<HPrime>& h) const {
  auto ws = workspace();
  const Vector nu_s = to_search(nu);
  ClassBest best;
  best_class(nu_s, *ws, best);
  const double g = complement_of(nu_s, best, *ws);
  DecisionOutcome o;
  o.winner = delta_from_prefix(best.prefix);
  o.complement = g;
  o.confidence = std::min(1.0, 1.0 - g);
  o.visited_nodes = best.nodes;
  o.radius_final = best.q_delta + best.tail_q;
  if (!h || g <= h->complement) o.chosen = o.winner;
  return o;
}

DecisionOutcome Decoder::map(const Vector& nu) const { return outcome(nu, std::nullopt); }

DecisionOutcome Decoder::decide(const Vector& nu, const HPrime& h) const { return outcome(nu, h); }

Verdict Decoder::classify(const Vector& nu, const std::optional<HPrime>& h, Workspace& ws) const {
  if (nu.size() != model_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "float solution length differs from model size");
  }
  ws.nu_s.noalias() = zd_ * nu;
  ClassBest best;
  best_class(ws.nu_s, ws, best);
  Verdict v;
  v.winner_is_origin = std::all_of(best.prefix.begin(), best.prefix.end(), [](std::int64_t x) { return x == 0; });
  v.best_is_origin =
      v.winner_is_origin && std::all_of(best.tail.begin(), best.tail.end(), [](std::int64_t x) { return x == 0; });
  if (h) {
    v.complement = complement_of(ws.nu_s, best, ws);
    v.accepted = v.complement <= h->complement;
  }
  return v;
}

IntVector Decoder::babai(const Vector& nu) const { return babai_impl(r_, reduced_.transform, nu); }

LatticePoint Decoder::closest(const Vector& nu, SearchStats* stats) const {
  return closest_impl(r_, reduced_.transform, nu, stats);
}

std::vector<LatticePoint> Decoder::enumerate(const Vector& nu, double chi_sq, std::int64_t cap) const {
  return enumerate_impl(r_, reduced_.transform, nu, chi_sq, cap);
}

std::vector<ClassMass> Decoder::posterior(const Vector& nu) const {
  auto ws = workspace();
  collect_classes(to_search(nu), options_.c, *ws);
  double top = -kInf;
  for (const auto& h : ws->hits) top = std::max(top, h.log_weight);
  double total = 0.0;
  for (const auto& h : ws->hits) total += std::exp(h.log_weight - top);
  std::vector<ClassMass> out;
  out.reserve(ws->hits.size());
  for (const auto& h : ws->hits) {
    out.push_back(ClassMass{delta_from_prefix(h.prefix), std::exp(h.log_weight - top) / total});
  }
  std::sort(out.begin(), out.end(), [](const ClassMass& a, const ClassMass& b) {
    if (a.mass != b.mass) return a.mass > b.mass;
    return lex_less(a.delta_n, b.delta_n);
  });
  return out;
}

IntVector babai_nearest_plane(const ReducedForm& r, const FloatSolution& nu) {
  return babai_impl(r.layers, r.transform, nu);
}

LatticePoint closest_lattice_point(const ReducedForm& r, const FloatSolution& nu) {
  return closest_impl(r.layers, r.transform, nu, nullptr);
}

std::vector<LatticePoint> enumerate_within_radius(const ReducedForm& r, const FloatSolution& nu, double chi,
                                                  std::int64_t cap) {
  if (!(chi > 0.0)) throw Error(ErrorCode::InvalidInput, "radius must be positive");
  return enumerate_impl(r.layers, r.transform, nu, chi * chi, cap);
}

std::vector<ClassMass> truncated_posterior(const AmbiguityModel& model, const FloatSolution& nu, double c) {
  DecoderOptions opt;
  opt.c = c;
  return Decoder(model, opt).posterior(nu);
}

DecisionOutcome map_decision(const AmbiguityModel& model, const FloatSolution& nu) {
  return Decoder(model).map(nu);
}

DecisionOutcome conditional_decision(const AmbiguityModel& model, const FloatSolution& nu, const HPrime& h) {
  return Decoder(model).decide(nu, h);
}

}  // namespace ambres
