#pragma once

// Explicit joint information matrix of a single-frequency (L1) scenario and
// its brute-force marginalization, in long double. Written from the
// measurement equations, independently of the library's assembly.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ambres/gnss.hpp"

namespace oracle {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

struct JointL1 {
  LMatrix info;  // over (N, nuisances)
  int k = 0;     // ambiguity count
};

inline LMatrix series_cov(const ambres::gnss::NoiseSpec& ns, double coef, int n) {
  LMatrix c(n, n);
  const long double tv = ns.time_varying, tc = ns.time_constant;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = tv * tv * std::pow(static_cast<long double>(coef), std::abs(i - j)) + tc * tc;
  return c;
}

inline JointL1 joint_l1(const ambres::gnss::Scenario& s) {
  using namespace ambres::gnss;
  const int k = s.n_satellites(), n = s.n_epochs;
  const long double lam = wavelength(Signal::L1);
  const bool stat = s.coordinates_prior == CoordinatesPrior::Static;
  const bool iono = s.sigma_delta_iono > 0.0;
  // Columns: N | r | I | clock | code bias | phase bias | wind-up.
  const int c_r = k, n_r = stat ? 3 : 3 * n;
  const int c_i = c_r + n_r, n_i = iono ? k : 0;
  const int c_t = c_i + n_i;
  const int c_bc = c_t + n, c_bp = c_bc + 1;
  const int c_w = c_bp + 1, n_w = s.windup_informed ? 0 : n;
  const int cols = c_w + n_w;

  LMatrix x = LMatrix::Zero(2 * k * n, cols);
  for (int sat = 0; sat < k; ++sat) {
    for (int i = 0; i < n; ++i) {
      const auto& e = s.satellites[i][sat];
      const int rp = sat * 2 * n + i, rc = sat * 2 * n + n + i;
      const int cr = c_r + (stat ? 0 : 3 * i);
      // Phase in cycles.
      x(rp, sat) = 1;
      for (int a = 0; a < 3; ++a) x(rp, cr + a) = e(a) / lam;
      if (iono) x(rp, c_i + sat) = -1 / lam;
      x(rp, c_t + i) = 1 / lam;
      x(rp, c_bp) = 1 / lam;
      if (n_w) x(rp, c_w + i) = 1;
      // Code in metres.
      for (int a = 0; a < 3; ++a) x(rc, cr + a) = e(a);
      if (iono) x(rc, c_i + sat) = 1;
      x(rc, c_t + i) = 1;
      x(rc, c_bc) = 1;
    }
  }
  LMatrix cov = LMatrix::Zero(2 * k * n, 2 * k * n);
  const LMatrix sp = series_cov(s.carrier_noise, s.ar1_phase, n);
  const LMatrix sc = series_cov(s.code_noise, s.ar1_code, n);
  for (int sat = 0; sat < k; ++sat) {
    cov.block(sat * 2 * n, sat * 2 * n, n, n) = sp;
    cov.block(sat * 2 * n + n, sat * 2 * n + n, n, n) = sc;
  }
  JointL1 j;
  j.k = k;
  j.info = x.transpose() * cov.ldlt().solve(x);
  if (iono) {
    for (int a = 0; a < k; ++a) j.info(c_i + a, c_i + a) += 1.0L / (s.sigma_delta_iono * s.sigma_delta_iono);
  }
  if (s.bias_precision) {
    const int idx[2] = {c_bc, c_bp};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) j.info(idx[a], idx[b]) += (*s.bias_precision)(a, b);
  }
  return j;
}

// J_aa - J_an J_nn^+ J_na with the pseudo-inverse from an eigendecomposition.
inline LMatrix schur_marginal(const LMatrix& j, int k) {
  const int m = static_cast<int>(j.rows()) - k;
  const LMatrix jnn = j.bottomRightCorner(m, m);
  Eigen::SelfAdjointEigenSolver<LMatrix> es(jnn);
  const long double top = es.eigenvalues().cwiseAbs().maxCoeff();
  LMatrix dinv = LMatrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const long double l = es.eigenvalues()(i);
    if (l > 1e-13L * top) dinv(i, i) = 1.0L / l;
  }
  const LMatrix pinv = es.eigenvectors() * dinv * es.eigenvectors().transpose();
  return j.topLeftCorner(k, k) - j.topRightCorner(k, m) * pinv * j.bottomLeftCorner(m, k);
}

inline std::vector<ambres::gnss::EpochGeometry> random_geometry(int k, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<ambres::gnss::EpochGeometry> out(n);
  ambres::gnss::EpochGeometry base;
  for (int s = 0; s < k; ++s) base.push_back(Eigen::Vector3d(g(rng), g(rng), -std::abs(g(rng)) - 0.5).normalized());
  for (int i = 0; i < n; ++i) {
    for (const auto& e : base) {
      const Eigen::Vector3d d(g(rng), g(rng), g(rng));
      out[i].push_back((e + 0.05 * i * d).normalized());
    }
  }
  return out;
}

inline double relative_difference(const ambres::Matrix& a, const LMatrix& b) {
  const LMatrix diff = a.cast<long double>() - b;
  return static_cast<double>(diff.norm() / b.norm());
}

}  // namespace oracle
