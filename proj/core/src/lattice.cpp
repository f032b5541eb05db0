#include "ambres/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ambres {

namespace {

__extension__ typedef __int128 i128;

constexpr i128 kI64Max = std::numeric_limits<std::int64_t>::max();
constexpr i128 kI64Min = std::numeric_limits<std::int64_t>::min();

std::int64_t narrow(i128 v) {
  if (v > kI64Max || v < kI64Min) {
    throw Error(ErrorCode::IntegerOverflow, "integer transform entry exceeds 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

std::int64_t checked_sub_mul(std::int64_t a, std::int64_t r, std::int64_t b) {
  return narrow(static_cast<i128>(a) - static_cast<i128>(r) * static_cast<i128>(b));
}

std::int64_t checked_add_mul(std::int64_t a, std::int64_t r, std::int64_t b) {
  return narrow(static_cast<i128>(a) + static_cast<i128>(r) * static_cast<i128>(b));
}

Matrix reversed(const Matrix& m) {
  return m.colwise().reverse().rowwise().reverse();
}

IntMatrix reversed(const IntMatrix& m) {
  return m.colwise().reverse().rowwise().reverse();
}

// Unimodular row reduction of a to upper-triangular form, applying the same
// row operations to b. Returns the determinant of a.
i128 row_reduce(IntMatrix& a, IntMatrix* b) {
  const int n = static_cast<int>(a.rows());
  i128 det = 1;
  for (int col = 0; col < n; ++col) {
    for (;;) {
      int piv = -1;
      for (int i = col; i < n; ++i) {
        if (a(i, col) != 0 && (piv < 0 || std::llabs(a(i, col)) < std::llabs(a(piv, col)))) piv = i;
      }
      if (piv < 0) return 0;
      bool done = true;
      for (int i = col; i < n; ++i) {
        if (i == piv || a(i, col) == 0) continue;
        const std::int64_t q = a(i, col) / a(piv, col);
        for (int j = 0; j < n; ++j) {
          a(i, j) = checked_sub_mul(a(i, j), q, a(piv, j));
          if (b) (*b)(i, j) = checked_sub_mul((*b)(i, j), q, (*b)(piv, j));
        }
        if (a(i, col) != 0) done = false;
      }
      if (piv != col) {
        a.row(piv).swap(a.row(col));
        if (b) b->row(piv).swap(b->row(col));
        det = -det;
      }
      if (done) break;
    }
    det *= a(col, col);
    if (det > kI64Max || det < kI64Min) {
      throw Error(ErrorCode::IntegerOverflow, "determinant exceeds 64 bits");
    }
  }
  return det;
}

}  // namespace

SpdForm::SpdForm(const Matrix& entries, Definiteness definiteness, Matrix null_space)
    : definiteness_(definiteness), null_space_(std::move(null_space)) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "quadratic form must be square and nonempty");
  }
  if (!entries.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "quadratic form has non-finite entries");
  }
  const double scale = entries.cwiseAbs().maxCoeff();
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  residual_ = scale > 0.0 ? asym / scale : 0.0;
  if (residual_ > kSymmetryTolerance) {
    throw Error(ErrorCode::AsymmetricInput,
                "symmetry residual " + std::to_string(residual_) + " exceeds 1e-9");
  }
  entries_ = 0.5 * (entries + entries.transpose());
}

int integer_determinant(const IntMatrix& z) {
  if (z.rows() != z.cols()) throw Error(ErrorCode::DimensionMismatch, "determinant of non-square matrix");
  IntMatrix a = z;
  const i128 det = row_reduce(a, nullptr);
  return static_cast<int>(std::clamp<i128>(det, -2, 2));
}

IntMatrix unimodular_inverse(const IntMatrix& z) {
  if (z.rows() != z.cols()) throw Error(ErrorCode::DimensionMismatch, "inverse of non-square matrix");
  const int n = static_cast<int>(z.rows());
  IntMatrix a = z;
  IntMatrix b = IntMatrix::Identity(n, n);
  const i128 det = row_reduce(a, &b);
  if (det != 1 && det != -1) throw Error(ErrorCode::NotUnimodular, "determinant is not +-1");
  for (int col = n - 1; col >= 0; --col) {
    if (a(col, col) == -1) {
      a.row(col) *= -1;
      b.row(col) *= -1;
    }
    for (int i = 0; i < col; ++i) {
      const std::int64_t q = a(i, col);
      if (q == 0) continue;
      for (int j = 0; j < n; ++j) {
        a(i, j) = checked_sub_mul(a(i, j), q, a(col, j));
        b(i, j) = checked_sub_mul(b(i, j), q, b(col, j));
      }
    }
  }
  return b;
}

UnimodularTransform::UnimodularTransform(const IntMatrix& z)
    : z_(z), z_inv_(unimodular_inverse(z)), det_(integer_determinant(z)) {}

UnimodularTransform::UnimodularTransform(const IntMatrix& z, const IntMatrix& z_inverse)
    : z_(z), z_inv_(z_inverse), det_(integer_determinant(z)) {
  if (det_ != 1 && det_ != -1) throw Error(ErrorCode::NotUnimodular, "determinant is not +-1");
  const IntMatrix check = unimodular_inverse(z);
  if (check != z_inverse) throw Error(ErrorCode::NotUnimodular, "supplied inverse is inconsistent");
}

UnimodularTransform UnimodularTransform::identity(int dim) {
  UnimodularTransform t;
  t.z_ = IntMatrix::Identity(dim, dim);
  t.z_inv_ = t.z_;
  t.det_ = 1;
  return t;
}

IntVector UnimodularTransform::apply(const IntVector& n) const {
  if (n.size() != z_.cols()) throw Error(ErrorCode::DimensionMismatch, "transform dimension");
  IntVector out(z_.rows());
  for (int i = 0; i < z_.rows(); ++i) {
    i128 acc = 0;
    for (int j = 0; j < z_.cols(); ++j) acc += static_cast<i128>(z_(i, j)) * n(j);
    out(i) = narrow(acc);
  }
  return out;
}

Vector UnimodularTransform::apply(const Vector& x) const {
  if (x.size() != z_.cols()) throw Error(ErrorCode::DimensionMismatch, "transform dimension");
  return z_.cast<double>() * x;
}

IntVector UnimodularTransform::apply_inverse(const IntVector& n) const {
  if (n.size() != z_inv_.cols()) throw Error(ErrorCode::DimensionMismatch, "transform dimension");
  IntVector out(z_inv_.rows());
  for (int i = 0; i < z_inv_.rows(); ++i) {
    i128 acc = 0;
    for (int j = 0; j < z_inv_.cols(); ++j) acc += static_cast<i128>(z_inv_(i, j)) * n(j);
    out(i) = narrow(acc);
  }
  return out;
}

Vector UnimodularTransform::apply_inverse(const Vector& x) const {
  if (x.size() != z_inv_.cols()) throw Error(ErrorCode::DimensionMismatch, "transform dimension");
  return z_inv_.cast<double>() * x;
}

CholeskyFactor cholesky(const SpdForm& m) {
  const int n = m.dim();
  const Matrix& a = m.entries();
  const double tol = 1e-12 * a.diagonal().cwiseAbs().maxCoeff();
  Matrix l = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > tol)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "pivot " + std::to_string(j) + " = " + std::to_string(d) + " below tolerance");
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return CholeskyFactor{std::move(l)};
}

Matrix layer_factor(const SpdForm& m) {
  const CholeskyFactor f = cholesky(SpdForm(reversed(m.entries())));
  // (P L P)(P L P)^T = M with P L P upper triangular; its transpose is R.
  return reversed(Matrix(f.lower.transpose()));
}

double complexity_estimate(const Matrix& r, double chi) {
  const int p = static_cast<int>(r.rows());
  double total = 0.0;
  double log_prod = 0.0;
  for (int i = 1; i <= p; ++i) {
    log_prod -= std::log(r(i - 1, i - 1));
    const double half = 0.5 * i;
    const double log_vol = half * std::log(std::numbers::pi) - std::lgamma(half + 1.0);
    total += std::exp(log_vol + i * std::log(chi) + log_prod);
  }
  return total;
}

namespace {

struct Gso {
  Matrix mu;
  Vector b;
};

Gso gram_schmidt(const Matrix& g) {
  const int n = static_cast<int>(g.rows());
  Gso s{Matrix::Zero(n, n), Vector::Zero(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      double v = g(i, j);
      for (int k = 0; k < j; ++k) v -= s.mu(j, k) * s.mu(i, k) * s.b(k);
      s.mu(i, j) = v / s.b(j);
    }
    double bi = g(i, i);
    for (int k = 0; k < i; ++k) bi -= s.mu(i, k) * s.mu(i, k) * s.b(k);
    s.b(i) = bi;
    s.mu(i, i) = 1.0;
  }
  return s;
}

ReducedForm assemble(const SpdForm& m, const IntMatrix& z, const IntMatrix& z_inv,
                     std::optional<int> block_boundary, std::int64_t swaps) {
  ReducedForm r;
  r.original = m;
  r.transform = UnimodularTransform(z, z_inv);
  const Matrix zi = z_inv.cast<double>();
  Matrix mp = zi.transpose() * m.entries() * zi;
  r.reduced = SpdForm(0.5 * (mp + mp.transpose()));
  r.layers = layer_factor(r.reduced);
  r.block_boundary = block_boundary.value_or(-1);
  r.swaps = swaps;
  return r;
}

}  // namespace

ReducedForm identity_reduction(const SpdForm& m, std::optional<int> block_boundary) {
  const IntMatrix id = IntMatrix::Identity(m.dim(), m.dim());
  return assemble(m, id, id, block_boundary, 0);
}

ReducedForm lll_reduce(const SpdForm& m, double delta, std::optional<int> block_boundary) {
  if (!(delta > 0.25 && delta <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "LLL delta must lie in (1/4, 1]");
  }
  const int p = m.dim();
  if (block_boundary && (*block_boundary < 1 || *block_boundary > p)) {
    throw Error(ErrorCode::InvalidInput, "block boundary outside [1, p]");
  }
  cholesky(m);

  // Work in reversed coordinate order: the standard LLL output has growing
  // Gram-Schmidt norms, which become descending layer diagonals once reversed.
  const Matrix g0 = reversed(m.entries());
  const int split = block_boundary ? p - *block_boundary : 0;
  IntMatrix u = IntMatrix::Identity(p, p);
  IntMatrix uinv = IntMatrix::Identity(p, p);
  Matrix g = g0;
  Gso s = gram_schmidt(g);

  constexpr double kSlack = 1e-12;
  constexpr std::int64_t kMaxSwaps = 1000000;
  std::int64_t swaps = 0;
  int k = 1;
  while (k < p) {
    for (int j = k - 1; j >= 0; --j) {
      const double mu = s.mu(k, j);
      if (std::abs(mu) <= 0.5 + kSlack) continue;
      const double rr = std::nearbyint(mu);
      if (std::abs(rr) > 9.0e18) throw Error(ErrorCode::IntegerOverflow, "size-reduction coefficient");
      const auto r = static_cast<std::int64_t>(rr);
      for (int i = 0; i < p; ++i) {
        u(i, k) = checked_sub_mul(u(i, k), r, u(i, j));
        uinv(j, i) = checked_add_mul(uinv(j, i), r, uinv(k, i));
      }
      g.row(k) -= rr * g.row(j);
      g.col(k) -= rr * g.col(j);
      for (int i = 0; i < j; ++i) s.mu(k, i) -= rr * s.mu(j, i);
      s.mu(k, j) -= rr;
    }
    const double mu = s.mu(k, k - 1);
    const bool crossing = split > 0 && k == split;
    if (!crossing && s.b(k) < (delta - mu * mu) * s.b(k - 1) * (1.0 - kSlack)) {
      u.col(k).swap(u.col(k - 1));
      uinv.row(k).swap(uinv.row(k - 1));
      const Matrix ud = u.cast<double>();
      g = ud.transpose() * g0 * ud;
      s = gram_schmidt(g);
      if (++swaps > kMaxSwaps) break;
      k = std::max(k - 1, 1);
    } else {
      ++k;
    }
  }

  const IntMatrix z = reversed(uinv);
  const IntMatrix z_inv = reversed(u);
  ReducedForm out = assemble(m, z, z_inv, block_boundary, swaps);

  // The search estimate must never get worse than leaving the basis alone.
  ReducedForm plain = identity_reduction(m, block_boundary);
  if (complexity_estimate(out.layers, 1.0) > complexity_estimate(plain.layers, 1.0) * (1.0 + 1e-12)) {
    return plain;
  }
  return out;
}

double quadratic_form(const SpdForm& m, const Vector& x) {
  if (x.size() != m.dim()) throw Error(ErrorCode::DimensionMismatch, "vector length differs from form size");
  return std::max(0.0, x.dot(m.entries() * x));
}

double quadratic_form(const SpdForm& m, const IntVector& n) {
  return quadratic_form(m, Vector(n.cast<double>()));
}

double log_determinant(const SpdForm& m) {
  const CholeskyFactor f = cholesky(m);
  return 2.0 * f.lower.diagonal().array().log().sum();
}

}  // namespace ambres
