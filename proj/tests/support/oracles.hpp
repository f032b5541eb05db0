#pragma once

// Brute-force references shared by the unit and acceptance tests. Nothing
// here calls into the library's search, reduction or bound code.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ambres/lattice.hpp"

namespace oracle {

using ambres::IntVector;
using ambres::Matrix;
using ambres::Vector;

// M = A^T A with A = s (I + 0.35 G); resampled until cond(M) <= max_cond.
inline Matrix random_form(int p, std::mt19937_64& rng, double max_cond = 30.0) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.8, 2.5);
  for (;;) {
    Matrix a = Matrix::Identity(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) a(i, j) += 0.35 * g(rng);
    Matrix m = scale(rng) * a.transpose() * a;
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(p - 1);
    if (lo > 0.0 && hi / lo <= max_cond) return m;
  }
}

inline double qf(const Matrix& m, const Vector& x) { return x.dot(m * x); }

// Calls f on every integer vector in the box center +- r.
inline void for_box(const IntVector& center, int r, const std::function<void(const IntVector&)>& f) {
  const auto p = center.size();
  IntVector x = center.array() - r;
  for (;;) {
    f(x);
    Eigen::Index i = 0;
    while (i < p && x(i) == center(i) + r) {
      x(i) = center(i) - r;
      ++i;
    }
    if (i == p) return;
    ++x(i);
  }
}

struct BoxResult {
  IntVector n;
  double dist = 0.0;
  bool interior = false;  // optimum strictly inside the box
  bool unique = true;     // runner-up is not within 1e-9 relative
};

inline BoxResult boxed_cvp(const Matrix& m, const Vector& nu, int r = 3) {
  const IntVector c = nu.array().round().cast<std::int64_t>();
  BoxResult best;
  best.dist = std::numeric_limits<double>::infinity();
  double second = best.dist;
  for_box(c, r, [&](const IntVector& n) {
    const double d = qf(m, nu - n.cast<double>());
    if (d < best.dist) {
      second = best.dist;
      best.dist = d;
      best.n = n;
    } else if (d < second) {
      second = d;
    }
  });
  best.interior = ((best.n - c).cwiseAbs().maxCoeff() < r);
  best.unique = second > best.dist * (1.0 + 1e-9) + 1e-12;
  return best;
}

// Relevant vectors by exhaustive scan: n is relevant iff no lattice point
// other than 0 and n lies in the closed ellipsoid around n/2 with squared
// radius n'Mn/4. One representative per +- pair (first nonzero positive).
inline std::vector<IntVector> brute_relevant(const Matrix& m) {
  const int p = static_cast<int>(m.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const double lmin = es.eigenvalues()(0);
  // |n|_M <= 2 mu <= sqrt(tr M) for every relevant n.
  const double max_norm_sq = m.trace() * (1.0 + 1e-9);
  const int cand = static_cast<int>(std::floor(std::sqrt(max_norm_sq / lmin)));
  std::vector<IntVector> out;
  for_box(IntVector::Zero(p), cand, [&](const IntVector& n) {
    Eigen::Index first = 0;
    while (first < p && n(first) == 0) ++first;
    if (first == p || n(first) < 0) return;
    const Vector nd = n.cast<double>();
    const double nn = qf(m, nd);
    if (nn > max_norm_sq) return;
    const Vector half = 0.5 * nd;
    const double r2 = nn / 4.0;
    const int reach = static_cast<int>(std::ceil(std::sqrt(r2 / lmin))) + 1;
    const IntVector c = half.array().round().cast<std::int64_t>();
    bool relevant = true;
    for_box(c, reach, [&](const IntVector& x) {
      if (!relevant || x.isZero() || x == n) return;
      if (qf(m, x.cast<double>() - half) <= r2 * (1.0 + 1e-12)) relevant = false;
    });
    if (relevant) out.push_back(n);
  });
  return out;
}

// P(|X| < t) for X ~ N(0, 1/a^2), evaluated as erf.
inline double slab(double a, double t) { return std::erf(a * t / std::numbers::sqrt2); }

}  // namespace oracle
