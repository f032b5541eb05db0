#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ambres/errors.hpp"

namespace ambres {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

enum class Definiteness { PositiveDefinite, PositiveSemidefinite };

// Symmetric quadratic-form coefficients. The input is averaged with its
// transpose; the pre-averaging residual is kept for inspection.
class SpdForm {
 public:
  static constexpr double kSymmetryTolerance = 1e-9;

  SpdForm() = default;
  explicit SpdForm(const Matrix& entries,
                   Definiteness definiteness = Definiteness::PositiveDefinite,
                   Matrix null_space = Matrix());

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }
  Definiteness definiteness() const { return definiteness_; }
  const Matrix& null_space() const { return null_space_; }
  double symmetry_residual() const { return residual_; }

 private:
  Matrix entries_;
  Definiteness definiteness_ = Definiteness::PositiveDefinite;
  Matrix null_space_;
  double residual_ = 0.0;
};

// Integer matrix with determinant +1 or -1; the inverse is computed exactly.
class UnimodularTransform {
 public:
  UnimodularTransform() = default;
  explicit UnimodularTransform(const IntMatrix& z);
  UnimodularTransform(const IntMatrix& z, const IntMatrix& z_inverse);
  static UnimodularTransform identity(int dim);

  int dim() const { return static_cast<int>(z_.rows()); }
  const IntMatrix& matrix() const { return z_; }
  const IntMatrix& inverse() const { return z_inv_; }
  int determinant() const { return det_; }

  IntVector apply(const IntVector& n) const;
  Vector apply(const Vector& x) const;
  IntVector apply_inverse(const IntVector& n) const;
  Vector apply_inverse(const Vector& x) const;

 private:
  IntMatrix z_;
  IntMatrix z_inv_;
  int det_ = 1;
};

// Exact determinant and inverse of a unimodular integer matrix. Throws
// NotUnimodular when |det| != 1 and IntegerOverflow if entries blow up.
int integer_determinant(const IntMatrix& z);
IntMatrix unimodular_inverse(const IntMatrix& z);

struct CholeskyFactor {
  Matrix lower;  // L with L * L^T = source
  int dim() const { return static_cast<int>(lower.rows()); }
};

CholeskyFactor cholesky(const SpdForm& m);

// Lower-triangular R with R^T R = m. Row i of R involves coordinates 0..i, so
// a depth-first search fixes coordinate 0 first; leading blocks of R are the
// layer-wise partial factors.
Matrix layer_factor(const SpdForm& m);

// Estimated node count of a depth-first search with radius chi over the
// layers of R: sum over i of V_i chi^i / prod_{j<=i} R_jj.
double complexity_estimate(const Matrix& layer_factor, double chi);

struct ReducedForm {
  SpdForm original;             // M
  UnimodularTransform transform;  // Z, with N' = Z N
  SpdForm reduced;              // M' = Z^{-T} M Z^{-1}
  Matrix layers;                // R with R^T R = M'
  int block_boundary = -1;      // p_Delta when the N0 block was kept separate
  std::int64_t swaps = 0;

  int dim() const { return original.dim(); }
};

// LLL reduction of the basis whose Gram matrix is m. Diagonal entries of the
// layer factor come out roughly descending. When block_boundary = b is given,
// coordinates [0, b) and [b, p) are never swapped across, and the second
// block only ever receives combinations of itself.
ReducedForm lll_reduce(const SpdForm& m, double delta = 1.0,
                       std::optional<int> block_boundary = std::nullopt);

ReducedForm identity_reduction(const SpdForm& m,
                               std::optional<int> block_boundary = std::nullopt);

double quadratic_form(const SpdForm& m, const Vector& x);
double quadratic_form(const SpdForm& m, const IntVector& n);

// log|m| from the Cholesky factor.
double log_determinant(const SpdForm& m);

}  // namespace ambres
