#include "ambres/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace ambres {

namespace {

constexpr double kBoundaryTol = 1e-9;

bool leading_positive(const IntVector& n) {
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (n(i) != 0) return n(i) > 0;
  }
  return false;
}

}  // namespace

bool is_relevant(const ReducedForm& r, const IntVector& n) {
  if (n.size() != r.dim()) throw Error(ErrorCode::DimensionMismatch, "vector length differs from form size");
  if (n.isZero()) return false;
  const double a_sq = quadratic_form(r.original, n);
  const Vector center = 0.5 * n.cast<double>();
  try {
    const auto pts = enumerate_within_radius(r, center, std::sqrt(0.25 * a_sq * (1.0 + kBoundaryTol)), 2);
    return pts.size() == 2;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CapacityExceeded) return false;
    throw;
  }
}

bool is_relevant(const SpdForm& m, const IntVector& n) { return is_relevant(lll_reduce(m), n); }

RelevantVectorSet relevant_vectors(const Decoder& decoder, std::optional<double> c, std::int64_t cap) {
  const AmbiguityModel& model = decoder.model();
  const int d = model.dim();
  const int pd = model.p_delta();
  const double a_min_sq = decoder.a_min_sq();
  const double cc = c.value_or(2.0 * a_min_sq + 10.0);
  if (!(cc > 0.0)) throw Error(ErrorCode::InvalidInput, "threshold constant must be positive");
  if (d > 62) throw Error(ErrorCode::Unsupported, "dimension too large for parity classes");

  RelevantVectorSet out;
  out.threshold_c = cc;
  out.threshold_sq = a_min_sq + cc;
  out.p_delta = pd;

  // A vector is relevant iff +-n are the only shortest members of n + 2L, so
  // the candidates are the strict minima of each parity class.
  const auto pts = decoder.enumerate(Vector::Zero(d), out.threshold_sq * (1.0 + kBoundaryTol), cap);
  struct Slot {
    int index = -1;
    double q = 0.0;
    bool unique = true;
  };
  std::unordered_map<std::uint64_t, Slot> best;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const IntVector& n = pts[i].n;
    if (!leading_positive(n)) continue;
    std::uint64_t key = 0;
    for (int j = 0; j < d; ++j) key |= static_cast<std::uint64_t>(n(j) & 1) << j;
    const double q = pts[i].distance_sq;
    auto [it, fresh] = best.try_emplace(key, Slot{i, q, true});
    if (fresh) continue;
    Slot& s = it->second;
    const double tol = kBoundaryTol * std::max(1.0, std::max(q, s.q));
    if (q < s.q - tol) {
      s = Slot{i, q, true};
    } else if (q <= s.q + tol) {
      s.unique = false;
    }
  }

  std::vector<int> keep;
  for (const auto& [key, s] : best) {
    if (!s.unique) continue;
    const IntVector& n = pts[s.index].n;
    if (pd < d && n.head(pd).isZero()) continue;
    if (!is_relevant(decoder.reduction(), n)) continue;
    keep.push_back(s.index);
  }
  std::sort(keep.begin(), keep.end(), [&](int a, int b) {
    if (pts[a].distance_sq != pts[b].distance_sq) return pts[a].distance_sq < pts[b].distance_sq;
    const IntVector& x = pts[a].n;
    const IntVector& y = pts[b].n;
    for (int j = 0; j < d; ++j) {
      if (x(j) != y(j)) return x(j) < y(j);
    }
    return false;
  });
  for (int i : keep) {
    out.vectors.push_back(pts[i].n);
    out.distances.push_back(std::sqrt(quadratic_form(model.form(), pts[i].n)));
  }
  if (!out.distances.empty()) out.a_min = out.distances.front();
  return out;
}

RelevantVectorSet relevant_vectors(const AmbiguityModel& model, std::optional<double> c, std::int64_t cap) {
  return relevant_vectors(Decoder(model), c, cap);
}

RelevantVectorSet single_facet(double a) {
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidInput, "distance must be positive");
  RelevantVectorSet out;
  IntVector one(1);
  one << 1;
  out.vectors.push_back(one);
  out.distances.push_back(a);
  out.a_min = a;
  out.threshold_c = 2.0 * a * a + 10.0;
  out.threshold_sq = a * a + out.threshold_c;
  out.p_delta = 1;
  return out;
}

}  // namespace ambres
