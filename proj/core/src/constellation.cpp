#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ambres/gnss.hpp"

namespace ambres::gnss {

namespace {

constexpr double kEarthRadius = 6371e3;
constexpr double kOrbitRadius = 26559.7e3;
constexpr double kMu = 3.986004418e14;
constexpr double kEarthRate = 7.2921151467e-5;
constexpr double kInclination = 55.0 * std::numbers::pi / 180.0;
constexpr double kMask = 10.0 * std::numbers::pi / 180.0;
constexpr int kPlanes = 6;
constexpr int kPerPlane = 6;

struct Orbit {
  double raan = 0.0;
  double phase = 0.0;
};

// Earth-fixed position of a circular orbit at time t.
Eigen::Vector3d position(const Orbit& o, double t) {
  const double n = std::sqrt(kMu / (kOrbitRadius * kOrbitRadius * kOrbitRadius));
  const double u = o.phase + n * t;
  const Eigen::Vector3d in_plane(std::cos(u), std::sin(u) * std::cos(kInclination), std::sin(u) * std::sin(kInclination));
  const double lon = o.raan - kEarthRate * t;
  const Eigen::Vector3d p(in_plane.x() * std::cos(lon) - in_plane.y() * std::sin(lon),
                          in_plane.x() * std::sin(lon) + in_plane.y() * std::cos(lon), in_plane.z());
  return kOrbitRadius * p;
}

double elevation(const Eigen::Vector3d& rx, const Eigen::Vector3d& sat) {
  const Eigen::Vector3d d = sat - rx;
  return std::asin(rx.normalized().dot(d.normalized()));
}

}  // namespace

std::vector<EpochGeometry> synthetic_constellation(int n_sat, double duration, std::uint64_t seed, double interval,
                                                   double start) {
  if (n_sat < 4) throw Error(ErrorCode::InvalidInput, "at least four satellites are required");
  if (!(duration >= 0.0) || !(interval > 0.0)) throw Error(ErrorCode::InvalidInput, "invalid time grid");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const int epochs = std::max(1, static_cast<int>(std::lround(duration / interval)));
  const double end = start + (epochs - 1) * interval;

  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double lat = (unit(rng) * 120.0 - 60.0) * std::numbers::pi / 180.0;
    const Eigen::Vector3d rx = kEarthRadius * Eigen::Vector3d(std::cos(lat), 0.0, std::sin(lat));
    const double raan0 = unit(rng) * two_pi;
    std::vector<Orbit> orbits;
    for (int pl = 0; pl < kPlanes; ++pl) {
      for (int s = 0; s < kPerPlane; ++s) {
        orbits.push_back({raan0 + pl * two_pi / kPlanes,
                          (s + 0.25 * pl + 0.2 * unit(rng)) * two_pi / kPerPlane});
      }
    }
    std::vector<std::pair<double, int>> visible;
    for (int i = 0; i < static_cast<int>(orbits.size()); ++i) {
      const double e0 = elevation(rx, position(orbits[i], start));
      const double e1 = elevation(rx, position(orbits[i], end));
      if (e0 > kMask && e1 > kMask) visible.emplace_back(e0, i);
    }
    if (static_cast<int>(visible.size()) < n_sat) continue;
    std::sort(visible.begin(), visible.end(), std::greater<>());
    std::vector<int> chosen;
    for (int i = 0; i < n_sat; ++i) chosen.push_back(visible[i].second);
    std::sort(chosen.begin(), chosen.end());

    std::vector<EpochGeometry> out(epochs);
    for (int e = 0; e < epochs; ++e) {
      const double t = start + e * interval;
      for (int i : chosen) out[e].push_back((rx - position(orbits[i], t)).normalized());
    }
    return out;
  }
  throw Error(ErrorCode::InvalidInput, "could not find enough visible satellites");
}

}  // namespace ambres::gnss
