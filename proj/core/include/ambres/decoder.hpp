#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "ambres/lattice.hpp"

namespace ambres {

enum class Separability { Separable, Intermediate, Nonseparable };

const char* to_string(Separability s);

// Quadratic form over (Delta N, N0) coordinates. The trailing n0_dim
// coordinates span the common-increment sublattice; they are marginalized
// (summed over) rather than decided. A separable model has n0_dim = 0.
class AmbiguityModel {
 public:
  AmbiguityModel() = default;
  AmbiguityModel(SpdForm form, int p, int p0, Separability separability, int n0_dim);

  // Already-separated form: every coordinate is decided.
  static AmbiguityModel separable(SpdForm form, int p = -1, int p0 = 0);
  // Form whose last n0_dim coordinates are the common increment.
  static AmbiguityModel nonseparable(SpdForm form, int n0_dim, int p0 = -1);

  const SpdForm& form() const { return form_; }
  int dim() const { return form_.dim(); }
  int p() const { return p_; }
  int p0() const { return p0_; }
  int p_delta() const { return dim() - n0_dim_; }
  int n0_dim() const { return n0_dim_; }
  Separability separability() const { return separability_; }
  bool is_separable() const { return n0_dim_ == 0; }
  IntMatrix n0_basis() const;

 private:
  SpdForm form_;
  int p_ = 0;
  int p0_ = 0;
  Separability separability_ = Separability::Separable;
  int n0_dim_ = 0;
};

using FloatSolution = Vector;

// Confidence threshold h' together with 1 - h', so thresholds like
// 1 - 1e-300 remain representable.
struct HPrime {
  double value = 0.0;
  double complement = 1.0;

  static HPrime from_value(double h);
  static HPrime from_log_odds(double log10_odds);
  double log_odds() const;
};

struct DecisionOutcome {
  std::optional<IntVector> chosen;  // empty when judgment is avoided
  IntVector winner;                 // posterior maximizer, always filled
  double confidence = 0.0;          // p(winner | nu) / h0, capped at 1
  double complement = 1.0;          // 1 - p(winner | nu) / h0
  std::int64_t visited_nodes = 0;
  double radius_final = 0.0;        // squared distance to the winner's best point
};

struct LatticePoint {
  IntVector n;
  double distance_sq = 0.0;
};

struct ClassMass {
  IntVector delta_n;
  double mass = 0.0;
};

struct SearchStats {
  std::int64_t visited_nodes = 0;
  std::vector<double> radii;  // squared radius after every improvement
};

struct DecoderOptions {
  double c = 50.0;                      // truncation constant on the squared distance
  std::int64_t capacity = 10'000'000;   // enumeration cap
  double lll_delta = 1.0;
  bool reduce = true;
  std::int64_t neighbor_capacity = 2'000'000;
};

// Outcome classes used by the Monte Carlo estimators.
struct Verdict {
  bool winner_is_origin = false;  // top Delta N class is the zero class
  bool best_is_origin = false;    // ... and its closest point is the origin
  bool accepted = true;
  double complement = 0.0;        // 1 - p/h0 when a threshold was applied
};

class Decoder {
 public:
  struct Workspace;

  explicit Decoder(AmbiguityModel model, DecoderOptions options = {});
  ~Decoder();
  Decoder(Decoder&&) noexcept;
  Decoder& operator=(Decoder&&) noexcept;

  const AmbiguityModel& model() const { return model_; }
  const ReducedForm& reduction() const { return reduced_; }
  const DecoderOptions& options() const { return options_; }

  // h0: posterior of the zero class at nu = 0.
  double h0() const;
  // Squared length of the shortest lattice vector outside the N0 sublattice.
  double a_min_sq() const { return a_min_sq_; }

  std::shared_ptr<Workspace> workspace() const;

  IntVector babai(const Vector& nu) const;
  LatticePoint closest(const Vector& nu, SearchStats* stats = nullptr) const;
  std::vector<LatticePoint> enumerate(const Vector& nu, double chi_sq, std::int64_t cap) const;
  std::vector<ClassMass> posterior(const Vector& nu) const;
  DecisionOutcome map(const Vector& nu) const;
  DecisionOutcome decide(const Vector& nu, const HPrime& h) const;

  Verdict classify(const Vector& nu, const std::optional<HPrime>& h, Workspace& ws) const;

 private:
  struct Neighbors;
  struct NeighborCache;
  struct ClassBest;

  Vector to_search(const Vector& nu) const;
  IntVector delta_from_prefix(const std::vector<std::int64_t>& x) const;
  bool prefix_less(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) const;
  double log_theta(const Vector& nu_s, const std::vector<std::int64_t>& x, Workspace& ws,
                   double* tail_q, std::vector<std::int64_t>* tail) const;
  void best_class(const Vector& nu_s, Workspace& ws, ClassBest& out) const;
  void collect_classes(const Vector& nu_s, double window, Workspace& ws) const;
  double complement_of(const Vector& nu_s, const ClassBest& best, Workspace& ws) const;
  const Neighbors* neighbors() const;
  DecisionOutcome outcome(const Vector& nu, const std::optional<HPrime>& h) const;

  AmbiguityModel model_;
  DecoderOptions options_;
  ReducedForm reduced_;
  Matrix r_;
  Matrix r00_;
  IntMatrix zinv_dd_;
  double log_theta0_ = 0.0;
  double a_min_sq_ = 0.0;
  double a0_ = 0.0;  // non-zero-class weight at nu = 0, relative scale
  double b0_ = 1.0;  // zero-class weight at nu = 0
  Matrix zd_;
  std::shared_ptr<NeighborCache> cache_;
};

IntVector babai_nearest_plane(const ReducedForm& r, const FloatSolution& nu);
LatticePoint closest_lattice_point(const ReducedForm& r, const FloatSolution& nu);
std::vector<LatticePoint> enumerate_within_radius(const ReducedForm& r, const FloatSolution& nu,
                                                  double chi, std::int64_t cap = 10'000'000);
std::vector<ClassMass> truncated_posterior(const AmbiguityModel& model, const FloatSolution& nu,
                                           double c = 50.0);
DecisionOutcome map_decision(const AmbiguityModel& model, const FloatSolution& nu);
DecisionOutcome conditional_decision(const AmbiguityModel& model, const FloatSolution& nu,
                                     const HPrime& h);

}  // namespace ambres
