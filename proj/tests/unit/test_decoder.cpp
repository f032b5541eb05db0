#include <gtest/gtest.h>

#include <map>
#include <random>

#include "ambres/decoder.hpp"
#include "oracles.hpp"

using namespace ambres;

namespace {

Vector random_nu(int p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  Vector nu(p);
  for (int i = 0; i < p; ++i) nu(i) = u(rng);
  return nu;
}

// Posterior over Delta N classes by direct summation over a box that holds
// the chi^2 = 60 ellipsoid around nu.
std::map<std::vector<std::int64_t>, double> brute_class_mass(const Matrix& m, int pd, const Vector& nu) {
  std::map<std::vector<std::int64_t>, double> mass;
  const IntVector c = nu.array().round().cast<std::int64_t>();
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues()(0);
  const int r = static_cast<int>(std::ceil(std::sqrt(60.0 / lmin))) + 1;
  double total = 0.0;
  oracle::for_box(c, r, [&](const IntVector& n) {
    const double w = std::exp(-0.5 * oracle::qf(m, nu - n.cast<double>()));
    std::vector<std::int64_t> key(n.data(), n.data() + pd);
    mass[key] += w;
    total += w;
  });
  for (auto& [k, v] : mass) v /= total;
  return mass;
}

}  // namespace

TEST(Decoder, ClosestMatchesBoxedSearch) {
  std::mt19937_64 rng(21);
  for (int f = 0; f < 10; ++f) {
    const int p = 2 + f % 3;
    const Matrix m = oracle::random_form(p, rng);
    const ReducedForm r = lll_reduce(SpdForm(m));
    for (int t = 0; t < 300; ++t) {
      const Vector nu = random_nu(p, rng);
      const auto ref = oracle::boxed_cvp(m, nu);
      if (!ref.interior || !ref.unique) continue;
      const LatticePoint got = closest_lattice_point(r, nu);
      EXPECT_EQ(got.n, ref.n);
      EXPECT_NEAR(got.distance_sq, ref.dist, 1e-9 * std::max(1.0, ref.dist));
    }
  }
}

TEST(Decoder, BabaiIsAFeasiblePoint) {
  std::mt19937_64 rng(2);
  const Matrix m = oracle::random_form(4, rng);
  const ReducedForm r = lll_reduce(SpdForm(m));
  const Vector nu = random_nu(4, rng);
  const IntVector b = babai_nearest_plane(r, nu);
  const LatticePoint c = closest_lattice_point(r, nu);
  EXPECT_GE(oracle::qf(m, nu - b.cast<double>()), c.distance_sq - 1e-12);
}

TEST(Decoder, EnumerationMatchesBox) {
  std::mt19937_64 rng(8);
  const Matrix m = oracle::random_form(3, rng);
  const ReducedForm r = lll_reduce(SpdForm(m));
  const Vector nu = random_nu(3, rng);
  const double chi = 2.5;
  const auto pts = enumerate_within_radius(r, nu, chi);
  int expected = 0;
  oracle::for_box(nu.array().round().cast<std::int64_t>(), 8, [&](const IntVector& n) {
    if (oracle::qf(m, nu - n.cast<double>()) <= chi * chi) ++expected;
  });
  EXPECT_EQ(static_cast<int>(pts.size()), expected);
  for (const auto& pt : pts) EXPECT_LE(pt.distance_sq, chi * chi + 1e-9);
}

TEST(Decoder, EnumerationCapThrows) {
  const Matrix m = Matrix::Identity(3, 3);
  const ReducedForm r = lll_reduce(SpdForm(m));
  try {
    enumerate_within_radius(r, Vector::Zero(3), 10.0, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CapacityExceeded);
  }
}

TEST(Decoder, LatticePointHasFullConfidence) {
  Matrix m(2, 2);
  m << 40, 12, 12, 30;
  const AmbiguityModel model = AmbiguityModel::separable(SpdForm(m));
  const Vector nu = (Vector(2) << 3, -1).finished();
  const DecisionOutcome o = map_decision(model, nu);
  ASSERT_TRUE(o.chosen.has_value());
  EXPECT_EQ(*o.chosen, (IntVector(2) << 3, -1).finished());
  EXPECT_NEAR(o.confidence, 1.0, 1e-9);
}

TEST(Decoder, SeparablePosteriorMatchesBruteForce) {
  std::mt19937_64 rng(4);
  const Matrix m = oracle::random_form(3, rng);
  const AmbiguityModel model = AmbiguityModel::separable(SpdForm(m));
  for (int t = 0; t < 20; ++t) {
    const Vector nu = random_nu(3, rng);
    const auto post = truncated_posterior(model, nu, 60.0);
    const auto ref = brute_class_mass(m, 3, nu);
    double covered = 0.0;
    for (const auto& c : post) {
      std::vector<std::int64_t> key(c.delta_n.data(), c.delta_n.data() + 3);
      ASSERT_TRUE(ref.count(key));
      EXPECT_NEAR(c.mass, ref.at(key), 1e-9);
      covered += ref.at(key);
    }
    EXPECT_GT(covered, 1.0 - 1e-9);
  }
}

TEST(Decoder, NonseparablePosteriorSumsOverCommonIncrement) {
  std::mt19937_64 rng(6);
  const Matrix m = oracle::random_form(3, rng);
  const AmbiguityModel model = AmbiguityModel::nonseparable(SpdForm(m), 1);
  const Decoder dec(model, DecoderOptions{60.0});
  for (int t = 0; t < 20; ++t) {
    const Vector nu = random_nu(3, rng);
    const auto ref = brute_class_mass(m, 2, nu);
    const auto post = dec.posterior(nu);
    ASSERT_FALSE(post.empty());
    std::vector<std::int64_t> best;
    double best_mass = -1.0;
    for (const auto& [k, v] : ref) {
      if (v > best_mass) {
        best_mass = v;
        best = k;
      }
    }
    EXPECT_EQ(std::vector<std::int64_t>(post.front().delta_n.data(), post.front().delta_n.data() + 2), best);
    EXPECT_NEAR(post.front().mass, best_mass, 1e-8);
    const DecisionOutcome o = dec.map(nu);
    EXPECT_EQ(std::vector<std::int64_t>(o.winner.data(), o.winner.data() + 2), best);
  }
}

TEST(Decoder, ConditionalDecisionRejectsAmbiguousPoint) {
  const AmbiguityModel model = AmbiguityModel::separable(SpdForm(Matrix::Identity(1, 1) * 9.0));
  const Vector mid = Vector::Constant(1, 0.5);
  const DecisionOutcome o = conditional_decision(model, mid, HPrime::from_log_odds(2.0));
  EXPECT_FALSE(o.chosen.has_value());
  const DecisionOutcome near = conditional_decision(model, Vector::Constant(1, 0.01), HPrime::from_log_odds(2.0));
  EXPECT_TRUE(near.chosen.has_value());
}

TEST(Decoder, ConfidenceAtZeroThresholdAlwaysDecides) {
  std::mt19937_64 rng(9);
  const Matrix m = oracle::random_form(3, rng);
  const AmbiguityModel model = AmbiguityModel::separable(SpdForm(m));
  const Decoder dec(model);
  for (int t = 0; t < 50; ++t) {
    const Vector nu = random_nu(3, rng);
    EXPECT_TRUE(dec.decide(nu, HPrime::from_value(0.0)).chosen.has_value());
  }
}

TEST(Decoder, RejectsWrongLength) {
  const AmbiguityModel model = AmbiguityModel::separable(SpdForm(Matrix::Identity(2, 2)));
  EXPECT_THROW(map_decision(model, Vector::Zero(3)), Error);
}

TEST(HPrime, LogOddsRoundTrip) {
  for (double l : {-3.0, 0.0, 5.0, 20.0, 200.0}) {
    EXPECT_NEAR(HPrime::from_log_odds(l).log_odds(), l, 1e-9 * std::max(1.0, std::abs(l)));
  }
  EXPECT_NEAR(HPrime::from_log_odds(20).complement, 1e-20, 1e-30);
}
