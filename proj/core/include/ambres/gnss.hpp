#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ambres/decoder.hpp"

namespace ambres::gnss {

constexpr double kSpeedOfLight = 299792458.0;

enum class Signal { L1, L2, L5 };

double frequency(Signal s);   // Hz
double wavelength(Signal s);  // m
double iono_scale(Signal s);  // (lambda / lambda_L1)^2

enum class MeasurementSet { L1, L1L2, L1L2L5, LW, LWLEW };

const char* to_string(MeasurementSet m);
MeasurementSet parse_measurement_set(std::string_view text);

// Raw carrier phases, the integer combination applied to them, and the code
// signals. Ambiguities follow the combined phases.
struct SignalLayout {
  std::vector<Signal> phase_raw;
  IntMatrix combination;  // p0 x phase_raw.size()
  std::vector<Signal> code;

  int p0() const { return static_cast<int>(combination.rows()); }
};

SignalLayout layout_of(MeasurementSet m);

// (L1, L2, L5) -> (L1, LW, LEW).
IntMatrix wide_lane_transform();
double wide_lane_wavelength();

// Stationary AR(1) covariance: innovation_var / (1 - coef^2) * coef^|i-j|.
SpdForm ar1_series_covariance(double coef, double innovation_var, int n);

enum class CoordinatesPrior { Static, Kinematic };
enum class InitKind { Cold, NonSelf, Self };

const char* to_string(CoordinatesPrior c);
const char* to_string(InitKind k);

// Standard deviations of the two independent error components.
struct NoiseSpec {
  double time_varying = 0.0;
  double time_constant = 0.0;
};

using EpochGeometry = std::vector<Eigen::Vector3d>;  // unit LOS per satellite

struct Scenario {
  int n_epochs = 10;
  double epoch_interval = 1.0;
  // pre_measurement_epochs + n_epochs entries; the resolution segment is the tail.
  std::vector<EpochGeometry> satellites;
  MeasurementSet measurement_set = MeasurementSet::L1L2L5;
  NoiseSpec carrier_noise{0.02, 0.02};  // cycles
  NoiseSpec code_noise{0.5, 0.5};       // m
  double ar1_phase = 0.95;
  double ar1_code = 0.5;
  double sigma_delta_iono = 0.0;  // m at L1
  CoordinatesPrior coordinates_prior = CoordinatesPrior::Kinematic;
  bool windup_informed = false;
  // Interfrequency-bias prior as a precision over (code biases, raw phase
  // biases) in m^-2; empty means non-informative.
  std::optional<Matrix> bias_precision;
  // Replaces sigma_delta_iono when set (K x K precision, m^-2).
  std::optional<Matrix> iono_precision;
  int pre_measurement_epochs = 0;
  std::optional<MeasurementSet> pre_measurement_set;
  double pre_noise_scale = 1.0;  // multiplies carrier and code noise before resolution

  int n_satellites() const { return satellites.empty() ? 0 : static_cast<int>(satellites.front().size()); }
  double baseline_length() const { return sigma_delta_iono * 1e6; }
};

void validate(const Scenario& s);

struct BuildOptions {
  // When set, flat priors become N(0, V) instead of an exact projection.
  std::optional<double> flat_prior_variance;
};

// Information matrix of the ambiguities in combined-phase coordinates
// (index j * K + k for combined phase j and satellite k).
Matrix ambiguity_information(const Scenario& s, const SignalLayout& layout, const BuildOptions& opt = {});
Matrix ambiguity_information(const Scenario& s, const BuildOptions& opt = {});

// Integer basis change N = B (Delta N, N0): the last satellite is the
// reference, N0_j = N_{j,K-1} and Delta N_{j,k} = N_{j,k} - N0_j.
IntMatrix delta_basis(int p0, int n_sat);

AmbiguityModel build_model(const Scenario& s, const SignalLayout& layout, const BuildOptions& opt = {});
AmbiguityModel build_model(const Scenario& s, const BuildOptions& opt = {});

// Nuisance parameters in the order used by the posterior: coordinates,
// ionospheric delays, code biases, raw phase biases.
struct NuisanceMode {
  IntVector n0;  // common increment, in the model's N0 coordinates
  double weight = 1.0;
  Vector mean;
};

struct NuisancePosterior {
  std::vector<std::string> labels;
  Matrix covariance;  // shared by every mode
  std::vector<NuisanceMode> modes;
  Separability separability = Separability::Separable;
};

// Measurement vector in the canonical row order: per satellite, the combined
// phases (epoch minor) followed by each code signal.
struct Truth {
  IntVector n;                          // combined-phase ambiguities, length p
  std::vector<Eigen::Vector3d> coords;  // one per epoch
  Vector iono;                          // per satellite, m
  std::vector<double> clock;            // per epoch, m
  Vector code_bias;                     // per code signal, m
  Vector phase_bias;                    // per raw phase signal, m
  std::vector<double> windup;           // per epoch, cycles
};

Truth zero_truth(const Scenario& s);
Vector simulate_measurements(const Scenario& s, const Truth& truth, std::uint64_t seed, double noise_scale = 1.0);

// Posterior of the nuisance parameters given Delta N (model coordinates,
// length p_Delta) and the measurements y, with one Gaussian per plausible N0.
NuisancePosterior nuisance_posterior(const Scenario& s, const IntVector& delta_n, const Vector& y);

// Cold and non-self models never treat the wind-up as known.
AmbiguityModel succeeding_init_model(const Scenario& s, InitKind kind);

// Posterior variance of e_i^k . r_i given the ambiguities, averaged over
// satellites, per resolution epoch (m^2).
std::vector<double> range_error_variance(const Scenario& s);

std::vector<EpochGeometry> synthetic_constellation(int n_sat, double duration, std::uint64_t seed,
                                                   double interval = 1.0, double start = 0.0);

// nu = true_delta_n + e with e ~ N(0, noise_scale^2 M^-1).
FloatSolution simulate_float_solution(const AmbiguityModel& model, const IntVector& true_delta_n,
                                      std::uint64_t seed, double noise_scale = 1.0);

}  // namespace ambres::gnss
