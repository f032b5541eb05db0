#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "ambres/bounds.hpp"
#include "ambres/gnss.hpp"
#include "ambres/voronoi.hpp"
#include "gnss_oracle.hpp"

using namespace ambres;
using namespace ambres::gnss;

namespace {

Scenario toy(int k, int n, std::uint64_t seed) {
  Scenario s;
  s.n_epochs = n;
  s.measurement_set = MeasurementSet::L1;
  s.satellites = oracle::random_geometry(k, n, seed);
  return s;
}

Scenario seven_sat(MeasurementSet set, double sigma, int epochs = 10) {
  Scenario s;
  s.measurement_set = set;
  s.sigma_delta_iono = sigma;
  s.n_epochs = epochs;
  s.satellites = synthetic_constellation(7, epochs, 3);
  return s;
}

double lower_log_odds(const AmbiguityModel& m) {
  const auto b = map_bounds(relevant_vectors(m));
  return log_odds(b.alpha_lower, b.alpha_lower_complement);
}

double upper_log_odds(const AmbiguityModel& m) {
  const auto b = map_bounds(relevant_vectors(m));
  return log_odds(b.alpha_upper, b.alpha_upper_complement);
}

Matrix bias_precision(MeasurementSet set, double sigma) {
  const auto l = layout_of(set);
  const auto nb = static_cast<Eigen::Index>(l.code.size() + l.phase_raw.size());
  return Matrix::Identity(nb, nb) / (sigma * sigma);
}

}  // namespace

TEST(Signals, WavelengthsAndIonoScale) {
  EXPECT_NEAR(wavelength(Signal::L1), 0.190293672798, 1e-11);
  EXPECT_NEAR(iono_scale(Signal::L2), std::pow(1575.42 / 1227.60, 2), 1e-12);
  EXPECT_NEAR(wide_lane_wavelength(), 0.861918400322, 1e-9);
  EXPECT_EQ(std::abs(integer_determinant(wide_lane_transform())), 1);
}

TEST(Signals, MeasurementSetNames) {
  for (auto m : {MeasurementSet::L1, MeasurementSet::L1L2, MeasurementSet::L1L2L5, MeasurementSet::LW,
                 MeasurementSet::LWLEW}) {
    EXPECT_EQ(parse_measurement_set(to_string(m)), m);
  }
  EXPECT_THROW(parse_measurement_set("L7"), Error);
}

TEST(Ar1, CovarianceMatchesSimulation) {
  const double a = 0.8, q = 0.36;
  const auto c = ar1_series_covariance(a, q, 4).entries();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  const int n = 400000;
  double x = g(rng) * std::sqrt(q / (1 - a * a));
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = x;
    x = a * x + std::sqrt(q) * g(rng);
  }
  for (int lag = 0; lag < 4; ++lag) {
    double s = 0.0;
    for (int i = 0; i + lag < n; ++i) s += xs[i] * xs[i + lag];
    EXPECT_NEAR(s / (n - lag), c(0, lag), 0.02 * c(0, 0));
  }
}

TEST(Ar1, RejectsNonStationary) {
  try {
    ar1_series_covariance(1.0, 1.0, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonStationary);
  }
}

TEST(GnssModel, MatchesBruteForceMarginalization) {
  int cases = 0;
  for (int k : {2, 3})
    for (int n : {1, 2})
      for (bool stat : {false, true})
        for (double sigma : {0.0, 0.005})
          for (bool windup : {false, true}) {
            Scenario s = toy(k, n, 100 + k * 10 + n);
            s.coordinates_prior = stat ? CoordinatesPrior::Static : CoordinatesPrior::Kinematic;
            s.sigma_delta_iono = sigma;
            s.windup_informed = windup;
            const Matrix m = ambiguity_information(s);
            const auto j = oracle::joint_l1(s);
            EXPECT_LT(oracle::relative_difference(m, oracle::schur_marginal(j.info, j.k)), 1e-9)
                << "k=" << k << " n=" << n << " static=" << stat << " sigma=" << sigma << " windup=" << windup;
            ++cases;
          }
  EXPECT_EQ(cases, 32);
}

TEST(GnssModel, MatchesBruteForceWithBiasPrior) {
  Scenario s = toy(3, 2, 7);
  s.sigma_delta_iono = 0.01;
  s.windup_informed = true;
  s.bias_precision = bias_precision(MeasurementSet::L1, 0.05);
  const auto j = oracle::joint_l1(s);
  EXPECT_LT(oracle::relative_difference(ambiguity_information(s), oracle::schur_marginal(j.info, j.k)), 1e-9);
}

TEST(GnssModel, WideLaneCongruence) {
  Scenario s = seven_sat(MeasurementSet::L1L2L5, 0.005, 3);
  const SignalLayout raw = layout_of(MeasurementSet::L1L2L5);
  SignalLayout wl = raw;
  wl.combination = wide_lane_transform() * raw.combination;
  const Matrix m_raw = ambiguity_information(s, raw);
  const Matrix m_wl = ambiguity_information(s, wl);
  const int k = s.n_satellites();
  // N_wl = (T kron I_K) N_raw, so M_wl = (T kron I)^-T M_raw (T kron I)^-1.
  const Matrix ti = unimodular_inverse(wide_lane_transform()).cast<double>();
  Matrix big = Matrix::Zero(3 * k, 3 * k);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) big.block(a * k, b * k, k, k) = ti(a, b) * Matrix::Identity(k, k);
  const Matrix expect = big.transpose() * m_raw * big;
  EXPECT_LT((m_wl - expect).norm() / expect.norm(), 1e-9);
}

TEST(GnssModel, DuplicateEpochAddsNoInformation) {
  for (bool stat : {false, true}) {
    Scenario one = toy(2, 1, 5);
    one.coordinates_prior = stat ? CoordinatesPrior::Static : CoordinatesPrior::Kinematic;
    one.sigma_delta_iono = 0.004;
    Scenario dup = one;
    dup.n_epochs = 2;
    dup.satellites = {one.satellites[0], one.satellites[0]};
    auto doubled = [](NoiseSpec ns) {
      return NoiseSpec{0.0, std::sqrt(ns.time_varying * ns.time_varying + ns.time_constant * ns.time_constant)};
    };
    dup.carrier_noise = doubled(one.carrier_noise);
    dup.code_noise = doubled(one.code_noise);
    const Matrix a = ambiguity_information(one);
    const Matrix b = ambiguity_information(dup);
    EXPECT_LT((a - b).norm() / a.norm(), 1e-9) << "static=" << stat;
    const auto j = oracle::joint_l1(dup);
    const auto ref = oracle::schur_marginal(j.info, j.k);
    EXPECT_LT(oracle::relative_difference(a, ref), 1e-9);
  }
}

TEST(GnssModel, FlatPriorLimitConverges) {
  Scenario s = seven_sat(MeasurementSet::L1L2, 0.005, 2);
  const Matrix exact = ambiguity_information(s);
  double last = std::numeric_limits<double>::infinity();
  for (double v : {1e4, 1e6, 1e8}) {
    const Matrix m = ambiguity_information(s, BuildOptions{v});
    const double d = (m - exact).norm() / exact.norm();
    EXPECT_LT(d, last);
    last = d;
  }
  EXPECT_LT(last, 1e-4);
  EXPECT_THROW(build_model(s, BuildOptions{1e6}), Error);
}

TEST(GnssModel, NoiseScalingIsQuadratic) {
  Scenario s = seven_sat(MeasurementSet::L1L2, 0.0, 3);
  s.code_noise = {1e4, 1e4};
  Scenario t = s;
  t.carrier_noise = {2 * s.carrier_noise.time_varying, 2 * s.carrier_noise.time_constant};
  const auto a = relevant_vectors(build_model(s));
  const auto b = relevant_vectors(build_model(t));
  // The search window is not scale invariant, so compare matching facets.
  EXPECT_NEAR(b.a_min * b.a_min / (a.a_min * a.a_min), 0.25, 1e-3);
  int matched = 0;
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < b.size(); ++j) {
      if (a.vectors[i] != b.vectors[j]) continue;
      EXPECT_NEAR(b.distances[j] * b.distances[j] / (a.distances[i] * a.distances[i]), 0.25, 1e-3);
      ++matched;
    }
  }
  EXPECT_GT(matched, 10);
}

struct SeparabilityCase {
  MeasurementSet set;
  bool bias_informative;
  bool windup_known;
  Separability expected;
  int n0_dim;
};

TEST(GnssModel, SeparabilityTruthTable) {
  const std::vector<SeparabilityCase> cases = {
      {MeasurementSet::L1, false, false, Separability::Separable, 0},
      {MeasurementSet::L1, false, true, Separability::Separable, 0},
      {MeasurementSet::L1, true, false, Separability::Separable, 0},
      {MeasurementSet::L1, true, true, Separability::Nonseparable, 1},
      {MeasurementSet::L1L2, false, false, Separability::Separable, 0},
      {MeasurementSet::L1L2, true, false, Separability::Intermediate, 1},
      {MeasurementSet::L1L2, true, true, Separability::Nonseparable, 2},
      {MeasurementSet::L1L2L5, true, false, Separability::Intermediate, 2},
      {MeasurementSet::L1L2L5, true, true, Separability::Nonseparable, 3},
      {MeasurementSet::LW, true, false, Separability::Nonseparable, 1},
      {MeasurementSet::LWLEW, true, false, Separability::Nonseparable, 2},
      {MeasurementSet::LWLEW, false, true, Separability::Separable, 0},
  };
  for (const auto& c : cases) {
    Scenario s = seven_sat(c.set, 0.005, 2);
    s.windup_informed = c.windup_known;
    if (c.bias_informative) s.bias_precision = bias_precision(c.set, 0.05);
    const AmbiguityModel m = build_model(s);
    EXPECT_EQ(m.separability(), c.expected) << to_string(c.set) << " bias=" << c.bias_informative
                                            << " windup=" << c.windup_known;
    EXPECT_EQ(m.n0_dim(), c.n0_dim);
    EXPECT_EQ(m.p_delta(), layout_of(c.set).p0() * (s.n_satellites() - 1));
  }
}

TEST(GnssModel, DeltaBasisIsUnimodular) {
  const IntMatrix b = delta_basis(2, 4);
  EXPECT_EQ(std::abs(integer_determinant(b)), 1);
  // N0 column of frequency 0 is the all-ones vector on that frequency.
  EXPECT_EQ(b.col(6).head(4), IntVector::Ones(4));
}

TEST(GnssModel, MoreEpochsMoreInformation) {
  const double a = lower_log_odds(build_model(seven_sat(MeasurementSet::L1L2, 0.005, 2)));
  const double b = lower_log_odds(build_model(seven_sat(MeasurementSet::L1L2, 0.005, 10)));
  EXPECT_GT(b, a);
}

TEST(GnssModel, RatesFallWithIonosphere) {
  double last = std::numeric_limits<double>::infinity();
  for (double sigma : {0.0, 0.005, 0.02}) {
    const double l = upper_log_odds(build_model(seven_sat(MeasurementSet::L1L2L5, sigma)));
    EXPECT_LT(l, last);
    last = l;
  }
}

TEST(GnssModel, ValidationErrors) {
  Scenario s = seven_sat(MeasurementSet::L1, 0.0, 2);
  s.satellites.pop_back();
  EXPECT_THROW(validate(s), Error);
  s = seven_sat(MeasurementSet::L1, 0.0, 2);
  s.satellites[0][0] *= 2.0;
  EXPECT_THROW(validate(s), Error);
  s = seven_sat(MeasurementSet::L1, 0.0, 2);
  s.ar1_phase = 1.0;
  try {
    validate(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonStationary);
  }
}

TEST(GnssModel, BaselineLabel) {
  Scenario s;
  s.sigma_delta_iono = 0.005;
  EXPECT_DOUBLE_EQ(s.baseline_length(), 5000.0);
}

TEST(Posterior, ZeroNoiseRecoversTruth) {
  Scenario s = seven_sat(MeasurementSet::L1L2, 0.005, 3);
  Truth t = zero_truth(s);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> amb(-20, 20);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < t.n.size(); ++i) t.n(i) = amb(rng);
  for (auto& c : t.coords) c = Eigen::Vector3d(g(rng), g(rng), g(rng));
  // Iono stays at its prior mean; a nonzero value would be shrunk.
  for (auto& c : t.clock) c = 10 * g(rng);
  t.code_bias = Vector::Constant(t.code_bias.size(), 0.3);
  t.windup = {0.1, 0.12, 0.15};
  const Vector y = simulate_measurements(s, t, 1, 0.0);
  const AmbiguityModel m = build_model(s);
  // Delta N in model coordinates.
  const int k = s.n_satellites(), p0 = 2;
  IntVector dn(m.p_delta());
  for (int j = 0; j < p0; ++j)
    for (int sat = 0; sat + 1 < k; ++sat) dn(j * (k - 1) + sat) = t.n(j * k + sat) - t.n(j * k + k - 1);
  const NuisancePosterior post = nuisance_posterior(s, dn, y);
  ASSERT_FALSE(post.modes.empty());
  const Vector& mean = post.modes.front().mean;
  for (int i = 0; i < 3; ++i) {
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(mean(3 * i + a), t.coords[i](a), 1e-6);
  }
  EXPECT_EQ(post.labels.front(), "r[0]");
}

TEST(Posterior, NoIonosphereWithoutVariance) {
  Scenario s = seven_sat(MeasurementSet::L1L2, 0.0, 2);
  const Vector y = simulate_measurements(s, zero_truth(s), 2);
  const auto post = nuisance_posterior(s, IntVector::Zero(build_model(s).p_delta()), y);
  for (const auto& l : post.labels) EXPECT_EQ(l.rfind("iono", 0), std::string::npos);
}

TEST(Posterior, CovarianceMatchesJointGaussian) {
  Scenario s = toy(5, 1, 12);
  s.sigma_delta_iono = 0.005;
  const auto j = oracle::joint_l1(s);
  // Condition on Delta N: keep the common increment N0 = sum of N as an
  // unknown column, i.e. transform N -> (Delta N, N0) and drop Delta N.
  const int k = 5;
  const int m = static_cast<int>(j.info.rows());
  oracle::LMatrix t = oracle::LMatrix::Identity(m, m);
  const IntMatrix b = delta_basis(1, k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) t(r, c) = static_cast<long double>(b(r, c));
  const oracle::LMatrix jt = t.transpose() * j.info * t;
  const oracle::LMatrix jn = jt.bottomRightCorner(m - (k - 1), m - (k - 1));
  Eigen::SelfAdjointEigenSolver<oracle::LMatrix> es(jn);
  const long double top = es.eigenvalues().maxCoeff();
  oracle::LMatrix dinv = oracle::LMatrix::Zero(jn.rows(), jn.cols());
  for (Eigen::Index i = 0; i < jn.rows(); ++i)
    if (es.eigenvalues()(i) > 1e-13L * top) dinv(i, i) = 1.0L / es.eigenvalues()(i);
  const oracle::LMatrix cov = es.eigenvectors() * dinv * es.eigenvectors().transpose();
  // Columns after N0: r (3), iono (k).
  const Vector y = simulate_measurements(s, zero_truth(s), 3);
  const auto post = nuisance_posterior(s, IntVector::Zero(k - 1), y);
  const Matrix got = post.covariance.topLeftCorner(3 + k, 3 + k);
  const oracle::LMatrix ref = cov.block(1, 1, 3 + k, 3 + k);
  EXPECT_LT(oracle::relative_difference(got, ref), 1e-8);
}

TEST(Succeeding, NonSelfWithoutPreSegmentIsCold) {
  Scenario s = seven_sat(MeasurementSet::L1L2, 0.005, 3);
  const AmbiguityModel a = succeeding_init_model(s, InitKind::NonSelf);
  const AmbiguityModel b = build_model(s);
  EXPECT_LT((a.form().entries() - b.form().entries()).norm(), 1e-12 * b.form().entries().norm());
  EXPECT_THROW(succeeding_init_model(s, InitKind::Self), Error);
}

TEST(Succeeding, OrderingAtFiveMillimetres) {
  for (auto set : {MeasurementSet::L1L2, MeasurementSet::L1L2L5}) {
    Scenario s;
    s.measurement_set = set;
    s.sigma_delta_iono = 0.005;
    s.n_epochs = 10;
    s.pre_measurement_epochs = 10;
    s.windup_informed = true;
    s.satellites = synthetic_constellation(7, 20, 3);
    const double cold = upper_log_odds(succeeding_init_model(s, InitKind::Cold));
    const double non_self_lo = lower_log_odds(succeeding_init_model(s, InitKind::NonSelf));
    const double non_self_hi = upper_log_odds(succeeding_init_model(s, InitKind::NonSelf));
    const double self = lower_log_odds(succeeding_init_model(s, InitKind::Self));
    EXPECT_GT(non_self_lo, cold) << to_string(set);
    EXPECT_GT(self, non_self_hi) << to_string(set);
  }
}

TEST(Succeeding, NoiselessPreSegmentApproachesKnownBiases) {
  Scenario s;
  s.measurement_set = MeasurementSet::L1L2;
  s.sigma_delta_iono = 0.005;
  s.n_epochs = 3;
  s.pre_measurement_epochs = 3;
  s.windup_informed = true;
  s.satellites = synthetic_constellation(7, 6, 5);
  Scenario known = s;
  known.pre_measurement_epochs = 0;
  known.satellites.erase(known.satellites.begin(), known.satellites.begin() + 3);
  known.sigma_delta_iono = 0.0;
  known.bias_precision = bias_precision(s.measurement_set, 1e-7);
  const Matrix target = build_model(known).form().entries();
  double last = std::numeric_limits<double>::infinity();
  for (double scale : {1e-1, 1e-2, 1e-3}) {
    s.pre_noise_scale = scale;
    const Matrix m = succeeding_init_model(s, InitKind::Self).form().entries();
    ASSERT_EQ(m.rows(), target.rows());
    const double d = (m - target).norm() / target.norm();
    EXPECT_LT(d, last);
    last = d;
  }
  EXPECT_LT(last, 1e-3);
}

TEST(RangeError, VanishesWithoutNoise) {
  Scenario s = seven_sat(MeasurementSet::L1, 0.0, 2);
  s.carrier_noise = {1e-7, 1e-7};
  for (double v : range_error_variance(s)) EXPECT_LT(v, 1e-12);
}

TEST(RangeError, WideLaneWorseAndMonotone) {
  double last = 0.0;
  for (double sigma : {0.0, 0.005, 0.01, 0.02}) {
    const auto l1 = range_error_variance(seven_sat(MeasurementSet::L1, sigma));
    const auto lw = range_error_variance(seven_sat(MeasurementSet::LW, sigma));
    double m1 = 0, mw = 0;
    for (double v : l1) m1 += v / l1.size();
    for (double v : lw) mw += v / lw.size();
    EXPECT_GE(m1, last);
    last = m1;
    if (sigma >= 0.005) EXPECT_GT(mw, m1);
  }
}

TEST(Constellation, UnitVectorsAndSlowMotion) {
  const auto g = synthetic_constellation(7, 60, 9);
  ASSERT_EQ(g.size(), 60u);
  double max_step = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    ASSERT_EQ(g[i].size(), 7u);
    for (const auto& e : g[i]) EXPECT_NEAR(e.norm(), 1.0, 1e-12);
    if (i) {
      for (int s = 0; s < 7; ++s) {
        const double c = std::clamp(g[i][s].dot(g[i - 1][s]), -1.0, 1.0);
        max_step = std::max(max_step, std::acos(c) * 180.0 / std::numbers::pi);
      }
    }
  }
  EXPECT_LT(max_step, 0.01);
  EXPECT_GT(max_step, 0.0);
}

TEST(Constellation, DeterministicAndStaticAtZeroDuration) {
  const auto a = synthetic_constellation(6, 10, 4);
  const auto b = synthetic_constellation(6, 10, 4);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int s = 0; s < 6; ++s) EXPECT_EQ(a[i][s], b[i][s]);
  EXPECT_EQ(synthetic_constellation(6, 0, 4).size(), 1u);
  EXPECT_THROW(synthetic_constellation(3, 10, 4), Error);
}

TEST(FloatSolution, CovarianceMatchesInverseInformation) {
  Matrix mm(3, 3);
  mm << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
  const AmbiguityModel model = AmbiguityModel::separable(SpdForm(mm));
  const IntVector truth = (IntVector(3) << 1, -2, 3).finished();
  const int n = 100000;
  Matrix acc = Matrix::Zero(3, 3);
  Vector mean = Vector::Zero(3);
  std::vector<Vector> draws;
  for (int i = 0; i < n; ++i) {
    draws.push_back(simulate_float_solution(model, truth, 1000 + i) - truth.cast<double>());
    mean += draws.back();
  }
  mean /= n;
  for (const auto& d : draws) acc += (d - mean) * (d - mean).transpose();
  acc /= (n - 1);
  const Matrix cov = mm.inverse();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double se = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / n);
      EXPECT_NEAR(acc(i, j), cov(i, j), 3.0 * se);
    }
}

TEST(FloatSolution, DeterministicAndScalable) {
  const AmbiguityModel model = AmbiguityModel::separable(SpdForm(Matrix::Identity(2, 2) * 5.0));
  const IntVector truth = (IntVector(2) << 4, 1).finished();
  EXPECT_EQ(simulate_float_solution(model, truth, 7), simulate_float_solution(model, truth, 7));
  EXPECT_LT((simulate_float_solution(model, truth, 7, 1e-12) - truth.cast<double>()).norm(), 1e-10);
  EXPECT_THROW(simulate_float_solution(model, IntVector::Zero(3), 7), Error);
}
