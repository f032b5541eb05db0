#include "ambres/gnss.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

namespace ambres::gnss {

double frequency(Signal s) {
  switch (s) {
    case Signal::L1: return 1.57542e9;
    case Signal::L2: return 1.2276e9;
    case Signal::L5: return 1.17645e9;
  }
  return 0.0;
}

double wavelength(Signal s) { return kSpeedOfLight / frequency(s); }

double iono_scale(Signal s) {
  const double r = wavelength(s) / wavelength(Signal::L1);
  return r * r;
}

const char* to_string(MeasurementSet m) {
  switch (m) {
    case MeasurementSet::L1: return "L1";
    case MeasurementSet::L1L2: return "L1+L2";
    case MeasurementSet::L1L2L5: return "L1+L2+L5";
    case MeasurementSet::LW: return "LW";
    case MeasurementSet::LWLEW: return "LW+LEW";
  }
  return "unknown";
}

MeasurementSet parse_measurement_set(std::string_view text) {
  std::string t;
  for (char c : text) {
    if (c == '_' || c == ' ') continue;
    t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (t == "L1") return MeasurementSet::L1;
  if (t == "L1+L2" || t == "L1L2") return MeasurementSet::L1L2;
  if (t == "L1+L2+L5" || t == "L1L2L5") return MeasurementSet::L1L2L5;
  if (t == "LW") return MeasurementSet::LW;
  if (t == "LW+LEW" || t == "LWLEW") return MeasurementSet::LWLEW;
  throw Error(ErrorCode::InvalidInput, "unknown measurement set '" + std::string(text) + "'");
}

const char* to_string(CoordinatesPrior c) { return c == CoordinatesPrior::Static ? "static" : "kinematic"; }

const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::Cold: return "cold";
    case InitKind::NonSelf: return "non_self";
    case InitKind::Self: return "self";
  }
  return "unknown";
}

SignalLayout layout_of(MeasurementSet m) {
  using S = Signal;
  SignalLayout l;
  switch (m) {
    case MeasurementSet::L1:
      l.phase_raw = {S::L1};
      l.combination = IntMatrix::Identity(1, 1);
      l.code = {S::L1};
      break;
    case MeasurementSet::L1L2:
      l.phase_raw = {S::L1, S::L2};
      l.combination = IntMatrix::Identity(2, 2);
      l.code = {S::L1, S::L2};
      break;
    case MeasurementSet::L1L2L5:
      l.phase_raw = {S::L1, S::L2, S::L5};
      l.combination = IntMatrix::Identity(3, 3);
      l.code = {S::L1, S::L2, S::L5};
      break;
    case MeasurementSet::LW:
      l.phase_raw = {S::L1, S::L2};
      l.combination = IntMatrix(1, 2);
      l.combination << 1, -1;
      l.code = {S::L1, S::L2};
      break;
    case MeasurementSet::LWLEW:
      l.phase_raw = {S::L1, S::L2, S::L5};
      l.combination = IntMatrix(2, 3);
      l.combination << 1, -1, 0, 0, 1, -1;
      l.code = {S::L1, S::L2, S::L5};
      break;
  }
  return l;
}

IntMatrix wide_lane_transform() {
  IntMatrix t(3, 3);
  t << 1, 0, 0, 1, -1, 0, 0, 1, -1;
  return t;
}

double wide_lane_wavelength() { return kSpeedOfLight / (frequency(Signal::L1) - frequency(Signal::L2)); }

SpdForm ar1_series_covariance(double coef, double innovation_var, int n) {
  if (!(std::abs(coef) < 1.0)) throw Error(ErrorCode::NonStationary, "AR(1) coefficient must lie in (-1, 1)");
  if (!(innovation_var >= 0.0) || n < 1) throw Error(ErrorCode::InvalidInput, "invalid AR(1) parameters");
  const double stat = innovation_var / (1.0 - coef * coef);
  Matrix c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = stat * std::pow(coef, std::abs(i - j));
  return SpdForm(c, Definiteness::PositiveSemidefinite);
}

void validate(const Scenario& s) {
  if (s.n_epochs < 1) throw Error(ErrorCode::InvalidInput, "n_epochs must be at least 1");
  if (s.pre_measurement_epochs < 0) throw Error(ErrorCode::InvalidInput, "pre_measurement_epochs must be >= 0");
  if (!(s.pre_noise_scale > 0.0) || !std::isfinite(s.pre_noise_scale)) {
    throw Error(ErrorCode::InvalidInput, "pre_noise_scale must be positive");
  }
  if (!(s.epoch_interval > 0.0)) throw Error(ErrorCode::InvalidInput, "epoch_interval must be positive");
  if (static_cast<int>(s.satellites.size()) != s.n_epochs + s.pre_measurement_epochs) {
    throw Error(ErrorCode::DimensionMismatch, "satellite geometry must cover pre-measurement and measurement epochs");
  }
  const int k = s.n_satellites();
  if (k < 2) throw Error(ErrorCode::InvalidInput, "at least two satellites are required");
  for (const auto& epoch : s.satellites) {
    if (static_cast<int>(epoch.size()) != k) {
      throw Error(ErrorCode::DimensionMismatch, "satellite count changes between epochs");
    }
    for (const auto& e : epoch) {
      if (!e.allFinite() || std::abs(e.norm() - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidInput, "line-of-sight vectors must be unit length");
      }
    }
  }
  for (double a : {s.ar1_phase, s.ar1_code}) {
    if (!(std::abs(a) < 1.0)) throw Error(ErrorCode::NonStationary, "AR(1) coefficient must lie in (-1, 1)");
  }
  for (double v : {s.carrier_noise.time_varying, s.carrier_noise.time_constant, s.code_noise.time_varying,
                   s.code_noise.time_constant, s.sigma_delta_iono}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "noise levels must be finite and >= 0");
  }
  if (s.iono_precision && (s.iono_precision->rows() != k || s.iono_precision->cols() != k)) {
    throw Error(ErrorCode::DimensionMismatch, "iono_precision must be K x K");
  }
  if (s.bias_precision) {
    const SignalLayout l = layout_of(s.measurement_set);
    const auto nb = static_cast<Eigen::Index>(l.code.size() + l.phase_raw.size());
    if (s.bias_precision->rows() != nb || s.bias_precision->cols() != nb) {
      throw Error(ErrorCode::DimensionMismatch, "bias_precision must cover code and raw phase biases");
    }
  }
}

namespace {

constexpr double kRankTolerance = 1e-10;

// Column offsets of one measurement segment: ambiguities first, then the
// nuisance blocks.
struct Columns {
  int p = 0;
  int coords = 0, n_coords = 0;
  int iono = 0, n_iono = 0;
  int clock = 0, n_clock = 0;
  int code_bias = 0, n_code_bias = 0;
  int phase_bias = 0, n_phase_bias = 0;
  int windup = 0, n_windup = 0;
  int total = 0;
};

struct PriorBlock {
  std::vector<int> cols;
  Matrix precision;
};

struct SegmentSpec {
  std::vector<EpochGeometry> geometry;
  SignalLayout layout;
  NoiseSpec carrier, code;
  double ar1_phase = 0.0, ar1_code = 0.0;
  bool static_coords = false;
  bool windup_known = false;
  bool ambiguities = true;
  bool iono = false;
  std::vector<PriorBlock> priors;          // Gaussian priors by column
  std::optional<double> flat_variance;     // replaces projection of the remaining columns

  int n() const { return static_cast<int>(geometry.size()); }
  int k() const { return static_cast<int>(geometry.front().size()); }
};

Columns columns_of(const SegmentSpec& sp) {
  Columns c;
  const int n = sp.n(), k = sp.k();
  c.p = sp.ambiguities ? sp.layout.p0() * k : 0;
  int at = c.p;
  auto take = [&at](int& off, int& cnt, int size) {
    off = at;
    cnt = size;
    at += size;
  };
  take(c.coords, c.n_coords, sp.static_coords ? 3 : 3 * n);
  take(c.iono, c.n_iono, sp.iono ? k : 0);
  take(c.clock, c.n_clock, n);
  take(c.code_bias, c.n_code_bias, static_cast<int>(sp.layout.code.size()));
  take(c.phase_bias, c.n_phase_bias, static_cast<int>(sp.layout.phase_raw.size()));
  take(c.windup, c.n_windup, sp.windup_known ? 0 : n);
  c.total = at;
  return c;
}

std::vector<int> range(int first, int count) {
  std::vector<int> v(count);
  std::iota(v.begin(), v.end(), first);
  return v;
}

// Covariance of one signal's error series: AR(1) plus a constant offset.
Matrix series_covariance(const NoiseSpec& ns, double coef, int n) {
  const double innovation = ns.time_varying * ns.time_varying * (1.0 - coef * coef);
  Matrix c = ar1_series_covariance(coef, innovation, n).entries();
  c.array() += ns.time_constant * ns.time_constant;
  return c;
}

// Rows mapping a noise block to unit variance, and rows along which the
// block has no noise at all.
struct Whitener {
  Matrix regular;
  Matrix null;
};

Whitener whitener_of(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector& l = es.eigenvalues();
  const Matrix& u = es.eigenvectors();
  const auto m = cov.rows();
  const double lmax = l.maxCoeff();
  Eigen::Index zeros = 0;
  if (!(lmax > 0.0)) {
    zeros = m;
  } else {
    while (zeros < m && l(zeros) < 1e-12 * lmax) ++zeros;
  }
  Whitener w;
  w.null = u.leftCols(zeros).transpose();
  w.regular = l.tail(m - zeros).cwiseSqrt().cwiseInverse().asDiagonal() * u.rightCols(m - zeros).transpose();
  return w;
}

Matrix psd_sqrt_rows(const Matrix& precision) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (precision + precision.transpose()));
  const Vector& l = es.eigenvalues();
  const double lmax = std::max(0.0, l.maxCoeff());
  std::vector<int> keep;
  for (int i = 0; i < l.size(); ++i)
    if (l(i) > 1e-14 * lmax && l(i) > 0.0) keep.push_back(i);
  Matrix rows(keep.size(), precision.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) rows.row(r) = std::sqrt(l(keep[r])) * es.eigenvectors().col(keep[r]).transpose();
  return rows;
}

struct NoiseBlock {
  int offset = 0;
  int size = 0;
  const Whitener* w = nullptr;
};

// Whitened linear-Gaussian system of one segment: y = X theta + e.
struct System {
  Columns cols;
  Matrix design;               // raw rows x columns
  std::vector<NoiseBlock> blocks;
  Whitener phase_w, code_w;
  Matrix phase_cov, code_cov;  // per satellite phase block and per code series
  Matrix x;                    // whitened rows, then prior rows
  Matrix c;                    // noise-free rows
  int regular_rows = 0;
  int null_rows = 0;
  bool phase_bias_informative = false;

  Matrix whiten(const Matrix& raw) const {
    Matrix out = Matrix::Zero(x.rows(), raw.cols());
    int r = 0;
    for (const auto& b : blocks) {
      const auto nr = b.w->regular.rows();
      out.middleRows(r, nr) = b.w->regular * raw.middleRows(b.offset, b.size);
      r += static_cast<int>(nr);
    }
    return out;
  }
  Matrix constrain(const Matrix& raw) const {
    Matrix out(null_rows, raw.cols());
    int r = 0;
    for (const auto& b : blocks) {
      const auto nr = b.w->null.rows();
      out.middleRows(r, nr) = b.w->null * raw.middleRows(b.offset, b.size);
      r += static_cast<int>(nr);
    }
    return out;
  }
};

System build_system(const SegmentSpec& sp) {
  System s;
  s.cols = columns_of(sp);
  const Columns& c = s.cols;
  const int n = sp.n(), k = sp.k();
  const SignalLayout& lay = sp.layout;
  const int p0 = lay.p0();
  const int nraw = static_cast<int>(lay.phase_raw.size());
  const int ncode = static_cast<int>(lay.code.size());
  const int per_sat = (p0 + ncode) * n;
  s.design = Matrix::Zero(k * per_sat, c.total);

  // Coefficients of the combined phases (cycles per metre or per cycle).
  Vector geo(p0), ion(p0), wind(p0);
  Matrix bias(p0, nraw);
  for (int j = 0; j < p0; ++j) {
    geo(j) = ion(j) = wind(j) = 0.0;
    for (int q = 0; q < nraw; ++q) {
      const double cq = static_cast<double>(lay.combination(j, q));
      const double lam = wavelength(lay.phase_raw[q]);
      geo(j) += cq / lam;
      ion(j) -= cq * iono_scale(lay.phase_raw[q]) / lam;
      wind(j) += cq;
      bias(j, q) = cq / lam;
    }
  }
  auto coord_col = [&](int i) { return c.coords + (sp.static_coords ? 0 : 3 * i); };

  for (int sat = 0; sat < k; ++sat) {
    const int base = sat * per_sat;
    for (int j = 0; j < p0; ++j) {
      for (int i = 0; i < n; ++i) {
        const int row = base + j * n + i;
        const Eigen::Vector3d& e = sp.geometry[i][sat];
        if (c.p > 0) s.design(row, j * k + sat) = 1.0;
        s.design.block(row, coord_col(i), 1, 3) = geo(j) * e.transpose();
        if (c.n_iono > 0) s.design(row, c.iono + sat) = ion(j);
        s.design(row, c.clock + i) = geo(j);
        for (int q = 0; q < nraw; ++q) s.design(row, c.phase_bias + q) = bias(j, q);
        if (c.n_windup > 0) s.design(row, c.windup + i) = wind(j);
      }
    }
    for (int q = 0; q < ncode; ++q) {
      for (int i = 0; i < n; ++i) {
        const int row = base + p0 * n + q * n + i;
        const Eigen::Vector3d& e = sp.geometry[i][sat];
        s.design.block(row, coord_col(i), 1, 3) = e.transpose();
        if (c.n_iono > 0) s.design(row, c.iono + sat) = iono_scale(lay.code[q]);
        s.design(row, c.clock + i) = 1.0;
        s.design(row, c.code_bias + q) = 1.0;
      }
    }
  }

  // Raw phase errors are independent per signal in cycles, so the combined
  // block is (C C^T) kron S.
  const Matrix cd = lay.combination.cast<double>();
  const Matrix sphi = series_covariance(sp.carrier, sp.ar1_phase, n);
  const Matrix cct = cd * cd.transpose();
  s.phase_cov = Matrix(p0 * n, p0 * n);
  for (int a = 0; a < p0; ++a)
    for (int b = 0; b < p0; ++b) s.phase_cov.block(a * n, b * n, n, n) = cct(a, b) * sphi;
  s.code_cov = series_covariance(sp.code, sp.ar1_code, n);
  s.phase_w = whitener_of(s.phase_cov);
  s.code_w = whitener_of(s.code_cov);
  for (int sat = 0; sat < k; ++sat) {
    const int base = sat * per_sat;
    s.blocks.push_back({base, p0 * n, &s.phase_w});
    for (int q = 0; q < ncode; ++q) s.blocks.push_back({base + p0 * n + q * n, n, &s.code_w});
  }
  for (const auto& b : s.blocks) {
    s.regular_rows += static_cast<int>(b.w->regular.rows());
    s.null_rows += static_cast<int>(b.w->null.rows());
  }

  // Prior pseudo-observations.
  std::vector<Matrix> prior_rows;
  std::vector<bool> informed(c.total, false);
  for (const auto& pb : sp.priors) {
    const Matrix r = psd_sqrt_rows(pb.precision);
    Matrix full = Matrix::Zero(r.rows(), c.total);
    for (std::size_t j = 0; j < pb.cols.size(); ++j) {
      full.col(pb.cols[j]) = r.col(static_cast<Eigen::Index>(j));
      if (r.col(static_cast<Eigen::Index>(j)).norm() > 0.0) informed[pb.cols[j]] = true;
    }
    prior_rows.push_back(std::move(full));
  }
  if (sp.flat_variance) {
    const double w = 1.0 / std::sqrt(*sp.flat_variance);
    std::vector<int> flat;
    for (int j = c.p; j < c.total; ++j)
      if (!informed[j]) flat.push_back(j);
    Matrix full = Matrix::Zero(static_cast<Eigen::Index>(flat.size()), c.total);
    for (std::size_t r = 0; r < flat.size(); ++r) full(static_cast<Eigen::Index>(r), flat[r]) = w;
    prior_rows.push_back(std::move(full));
  }
  Eigen::Index np = 0;
  for (const auto& r : prior_rows) np += r.rows();
  s.x = Matrix::Zero(s.regular_rows + np, c.total);
  s.x.topRows(s.regular_rows) = s.whiten(s.design).topRows(s.regular_rows);
  Eigen::Index at = s.regular_rows;
  for (const auto& r : prior_rows) {
    s.x.middleRows(at, r.rows()) = r;
    at += r.rows();
  }
  s.c = s.constrain(s.design);
  for (int q = 0; q < c.n_phase_bias; ++q) {
    if (s.x.bottomRows(np).col(c.phase_bias + q).norm() > 0.0) s.phase_bias_informative = true;
  }
  return s;
}

Matrix select_cols(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
  return out;
}

// Target columns with the noise-free constraints solved for the nuisance:
// nuisance = pinv * (d - ct * target) + k * zeta.
struct Reduced {
  Matrix a, g;
  Matrix k, pinv, ct;
};

Reduced eliminate(const System& s, const std::vector<int>& target, const std::vector<int>& nuisance) {
  Reduced r;
  r.a = select_cols(s.x, target);
  const Matrix xu = select_cols(s.x, nuisance);
  const auto nu = static_cast<Eigen::Index>(nuisance.size());
  if (s.null_rows == 0) {
    r.g = xu;
    r.k = Matrix::Identity(nu, nu);
    r.pinv = Matrix::Zero(nu, 0);
    r.ct = Matrix::Zero(0, static_cast<Eigen::Index>(target.size()));
    return r;
  }
  r.ct = select_cols(s.c, target);
  const Matrix cu = select_cols(s.c, nuisance);
  Eigen::JacobiSVD<Matrix> svd(cu, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > kRankTolerance * smax) ++rank;
  r.pinv = svd.matrixV().leftCols(rank) * sv.head(rank).cwiseInverse().asDiagonal() *
           svd.matrixU().leftCols(rank).transpose();
  const Matrix resid = r.ct - cu * (r.pinv * r.ct);
  if (resid.norm() > 1e-9 * std::max(1.0, r.ct.norm())) {
    throw Error(ErrorCode::DegenerateModel, "noise-free measurement combinations fix the ambiguities");
  }
  r.k = svd.matrixV().rightCols(nu - rank);
  r.a -= xu * (r.pinv * r.ct);
  r.g = xu * r.k;
  return r;
}

// Orthogonal complement of span(g), via rank-revealing QR.
struct Projector {
  Eigen::ColPivHouseholderQR<Matrix> qr;
  Eigen::Index rank = 0;
  Vector scale;
  bool empty = true;

  explicit Projector(const Matrix& g) {
    if (g.cols() == 0) return;
    empty = false;
    scale = g.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j)
      if (!(scale(j) > 0.0)) scale(j) = 1.0;
    const Matrix gs = g * scale.cwiseInverse().asDiagonal();
    qr = Eigen::ColPivHouseholderQR<Matrix>(gs.rows(), gs.cols());
    qr.setThreshold(kRankTolerance);
    qr.compute(gs);
    rank = qr.rank();
  }

  // Coordinates of the residual in an orthonormal basis of the complement.
  Matrix tail(const Matrix& a) const {
    if (empty) return a;
    const Matrix q = qr.householderQ().adjoint() * a;
    return q.bottomRows(q.rows() - rank);
  }

  // A generalized inverse of g (exact on its row space).
  Matrix pseudo_inverse(const Matrix& g) const {
    if (empty) return Matrix::Zero(0, g.rows());
    const Matrix gs = g * scale.cwiseInverse().asDiagonal();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(gs.rows(), gs.cols());
    cod.setThreshold(kRankTolerance);
    cod.compute(gs);
    return scale.cwiseInverse().asDiagonal() * cod.pseudoInverse();
  }
};

Matrix gram(const Matrix& t) {
  Matrix m = t.transpose() * t;
  return 0.5 * (m + m.transpose());
}

// Information on the target columns after marginalizing every other column.
Matrix marginal_information(const System& s, const std::vector<int>& target) {
  std::vector<bool> is_target(s.cols.total, false);
  for (int j : target) is_target[j] = true;
  std::vector<int> nuisance;
  for (int j = 0; j < s.cols.total; ++j)
    if (!is_target[j]) nuisance.push_back(j);
  const Reduced r = eliminate(s, target, nuisance);
  const Projector proj(r.g);
  return gram(proj.tail(r.a));
}

std::vector<EpochGeometry> segment_geometry(const Scenario& s, bool pre) {
  const auto first = s.satellites.begin();
  if (pre) return {first, first + s.pre_measurement_epochs};
  return {first + s.pre_measurement_epochs, s.satellites.end()};
}

bool has_iono(const Scenario& s) { return s.iono_precision.has_value() || s.sigma_delta_iono > 0.0; }

void add_default_priors(SegmentSpec& sp, const Scenario& s, bool with_bias) {
  const Columns c = columns_of(sp);
  if (s.iono_precision) {
    sp.priors.push_back({range(c.iono, c.n_iono), *s.iono_precision});
  } else if (sp.iono) {
    const double w = 1.0 / (s.sigma_delta_iono * s.sigma_delta_iono);
    sp.priors.push_back({range(c.iono, c.n_iono), w * Matrix::Identity(c.n_iono, c.n_iono)});
  }
  if (with_bias && s.bias_precision) {
    std::vector<int> cols = range(c.code_bias, c.n_code_bias + c.n_phase_bias);
    if (static_cast<int>(cols.size()) != s.bias_precision->rows()) {
      throw Error(ErrorCode::DimensionMismatch, "bias_precision does not match the signal layout");
    }
    sp.priors.push_back({cols, *s.bias_precision});
  }
}

SegmentSpec cold_spec(const Scenario& s, const SignalLayout& layout, bool ambiguities) {
  SegmentSpec sp;
  sp.geometry = segment_geometry(s, false);
  sp.layout = layout;
  sp.carrier = s.carrier_noise;
  sp.code = s.code_noise;
  sp.ar1_phase = s.ar1_phase;
  sp.ar1_code = s.ar1_code;
  sp.static_coords = s.coordinates_prior == CoordinatesPrior::Static;
  sp.windup_known = s.windup_informed;
  sp.ambiguities = ambiguities;
  sp.iono = has_iono(s);
  add_default_priors(sp, s, true);
  return sp;
}

// Integer basis (Delta N, kept N0, absorbed N0) of the ambiguity lattice.
struct LatticeLayout {
  IntMatrix basis;  // p x p, unimodular
  int p_delta = 0;
  int k0 = 0;
  Separability separability = Separability::Separable;
};

LatticeLayout lattice_layout(const SignalLayout& lay, int k, bool phase_bias_informative, bool windup_known) {
  const int p0 = lay.p0();
  const int p = p0 * k;
  LatticeLayout out;
  out.p_delta = p - p0;
  IntMatrix b = delta_basis(p0, k);
  if (!phase_bias_informative) {
    out.basis = b;
    return out;
  }
  const IntVector v = lay.combination.rowwise().sum();
  if (windup_known || v.isZero()) {
    out.basis = b;
    out.k0 = p0;
    out.separability = Separability::Nonseparable;
    return out;
  }
  if (p0 == 1) {
    out.basis = b;
    return out;
  }
  // The wind-up absorbs the common increment along v; complete v to a
  // unimodular N0 basis with v last.
  int pivot = -1;
  for (int j = 0; j < p0; ++j)
    if (std::abs(v(j)) == 1) pivot = j;
  if (pivot < 0) throw Error(ErrorCode::Unsupported, "wind-up direction is not primitive in the N0 lattice");
  IntMatrix e = IntMatrix::Identity(p0, p0);
  e.col(pivot) = v;
  std::vector<int> order;
  for (int j = 0; j < p0; ++j)
    if (j != pivot) order.push_back(j);
  order.push_back(pivot);
  IntMatrix full = IntMatrix::Identity(p, p);
  for (int j = 0; j < p0; ++j) full.block(out.p_delta, out.p_delta + j, p0, 1) = e.col(order[j]);
  out.basis = b * full;
  out.k0 = p0 - 1;
  out.separability = Separability::Intermediate;
  return out;
}

AmbiguityModel model_from_information(const Matrix& mn, const SignalLayout& lay, int k, bool phase_bias_informative,
                                      bool windup_known) {
  const LatticeLayout ll = lattice_layout(lay, k, phase_bias_informative, windup_known);
  const Matrix bd = ll.basis.cast<double>();
  const Matrix ml = bd.transpose() * mn * bd;
  const int keep = ll.p_delta + ll.k0;
  const int p = static_cast<int>(ml.rows());
  const double scale = ml.diagonal().cwiseAbs().maxCoeff();
  if (keep < p) {
    const double dropped = ml.rightCols(p - keep).cwiseAbs().maxCoeff();
    if (dropped > 1e-7 * scale) {
      throw Error(ErrorCode::DegenerateModel, "marginalized information has unexpected rank");
    }
  }
  SpdForm form(ml.topLeftCorner(keep, keep));
  try {
    cholesky(form);
  } catch (const Error&) {
    throw Error(ErrorCode::DegenerateModel, "marginalized ambiguity information is singular");
  }
  return AmbiguityModel(std::move(form), p, lay.p0(), ll.separability, ll.k0);
}

}  // namespace

IntMatrix delta_basis(int p0, int n_sat) {
  const int p = p0 * n_sat;
  const int pd = p - p0;
  IntMatrix b = IntMatrix::Zero(p, p);
  for (int j = 0; j < p0; ++j) {
    for (int s = 0; s < n_sat; ++s) {
      const int row = j * n_sat + s;
      if (s + 1 < n_sat) b(row, j * (n_sat - 1) + s) = 1;
      b(row, pd + j) = 1;
    }
  }
  return b;
}

Matrix ambiguity_information(const Scenario& s, const SignalLayout& layout, const BuildOptions& opt) {
  validate(s);
  SegmentSpec sp = cold_spec(s, layout, true);
  sp.flat_variance = opt.flat_prior_variance;
  const System sys = build_system(sp);
  return marginal_information(sys, range(0, sys.cols.p));
}

Matrix ambiguity_information(const Scenario& s, const BuildOptions& opt) {
  return ambiguity_information(s, layout_of(s.measurement_set), opt);
}

AmbiguityModel build_model(const Scenario& s, const SignalLayout& layout, const BuildOptions& opt) {
  if (opt.flat_prior_variance) {
    throw Error(ErrorCode::Unsupported, "finite flat-prior variance is only available for ambiguity_information");
  }
  validate(s);
  const SegmentSpec sp = cold_spec(s, layout, true);
  const System sys = build_system(sp);
  const Matrix mn = marginal_information(sys, range(0, sys.cols.p));
  return model_from_information(mn, layout, sp.k(), sys.phase_bias_informative, sp.windup_known);
}

AmbiguityModel build_model(const Scenario& s, const BuildOptions& opt) {
  return build_model(s, layout_of(s.measurement_set), opt);
}

Truth zero_truth(const Scenario& s) {
  const SignalLayout l = layout_of(s.measurement_set);
  Truth t;
  t.n = IntVector::Zero(l.p0() * s.n_satellites());
  t.coords.assign(s.n_epochs, Eigen::Vector3d::Zero());
  t.iono = Vector::Zero(s.n_satellites());
  t.clock.assign(s.n_epochs, 0.0);
  t.code_bias = Vector::Zero(static_cast<Eigen::Index>(l.code.size()));
  t.phase_bias = Vector::Zero(static_cast<Eigen::Index>(l.phase_raw.size()));
  t.windup.assign(s.n_epochs, 0.0);
  return t;
}

namespace {

Vector truth_vector(const Columns& c, const Truth& t, bool static_coords) {
  Vector th = Vector::Zero(c.total);
  for (int j = 0; j < c.p; ++j) th(j) = static_cast<double>(t.n(j));
  const int n = c.n_clock;
  if (static_coords) {
    th.segment(c.coords, 3) = t.coords.at(0);
  } else {
    for (int i = 0; i < n; ++i) th.segment(c.coords + 3 * i, 3) = t.coords.at(i);
  }
  if (c.n_iono > 0) th.segment(c.iono, c.n_iono) = t.iono;
  for (int i = 0; i < n; ++i) th(c.clock + i) = t.clock.at(i);
  th.segment(c.code_bias, c.n_code_bias) = t.code_bias;
  th.segment(c.phase_bias, c.n_phase_bias) = t.phase_bias;
  for (int i = 0; i < c.n_windup; ++i) th(c.windup + i) = t.windup.at(i);
  return th;
}

}  // namespace

Vector simulate_measurements(const Scenario& s, const Truth& truth, std::uint64_t seed, double noise_scale) {
  validate(s);
  const SegmentSpec sp = cold_spec(s, layout_of(s.measurement_set), true);
  const System sys = build_system(sp);
  const Columns& c = sys.cols;
  if (truth.n.size() != c.p || truth.iono.size() != s.n_satellites() ||
      static_cast<int>(truth.coords.size()) != s.n_epochs || static_cast<int>(truth.clock.size()) != s.n_epochs ||
      truth.code_bias.size() != c.n_code_bias || truth.phase_bias.size() != c.n_phase_bias ||
      static_cast<int>(truth.windup.size()) != s.n_epochs) {
    throw Error(ErrorCode::DimensionMismatch, "truth does not match the scenario");
  }
  Vector y = sys.design * truth_vector(c, truth, sp.static_coords);
  if (sp.windup_known) {
    // Known wind-up still enters the phases.
    const SignalLayout& lay = sp.layout;
    const int n = sp.n(), k = sp.k(), per_sat = (lay.p0() + static_cast<int>(lay.code.size())) * n;
    const IntVector v = lay.combination.rowwise().sum();
    for (int sat = 0; sat < k; ++sat)
      for (int j = 0; j < lay.p0(); ++j)
        for (int i = 0; i < n; ++i) y(sat * per_sat + j * n + i) += static_cast<double>(v(j)) * truth.windup[i];
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw = [&](const Matrix& cov) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    Vector z(cov.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return Vector(es.eigenvectors() * (es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cwiseProduct(z)));
  };
  for (const auto& b : sys.blocks) {
    const Matrix& cov = b.w == &sys.phase_w ? sys.phase_cov : sys.code_cov;
    y.segment(b.offset, b.size) += noise_scale * draw(cov);
  }
  return y;
}

NuisancePosterior nuisance_posterior(const Scenario& s, const IntVector& delta_n, const Vector& y) {
  validate(s);
  const SignalLayout lay = layout_of(s.measurement_set);
  const SegmentSpec sp = cold_spec(s, lay, true);
  const System sys = build_system(sp);
  const Columns& c = sys.cols;
  if (y.size() != sys.design.rows()) throw Error(ErrorCode::DimensionMismatch, "measurement vector size");
  const LatticeLayout ll = lattice_layout(lay, sp.k(), sys.phase_bias_informative, sp.windup_known);
  if (delta_n.size() != ll.p_delta) throw Error(ErrorCode::DimensionMismatch, "delta_n size differs from p_Delta");

  const std::vector<int> target = range(0, c.p);
  const std::vector<int> nuisance = range(c.p, c.total - c.p);
  const Reduced red = eliminate(sys, target, nuisance);
  const Projector proj(red.g);
  const Matrix gpinv = proj.pseudo_inverse(red.g);

  Vector yw = sys.whiten(y);
  const Vector d = sys.constrain(y);
  if (d.size() > 0) yw -= select_cols(sys.x, nuisance) * (red.pinv * d);

  const Matrix bd = ll.basis.cast<double>();
  const Vector base_n = bd.leftCols(ll.p_delta) * delta_n.cast<double>();
  const Matrix bm = bd.middleCols(ll.p_delta, ll.k0);

  NuisancePosterior out;
  out.separability = ll.separability;
  std::vector<IntVector> ms;
  std::vector<double> logw;
  if (ll.k0 == 0) {
    ms.push_back(IntVector());
    logw.push_back(0.0);
  } else {
    const Vector u = proj.tail(yw - red.a * base_n);
    const Matrix v = proj.tail(red.a * bm);
    const Matrix h = gram(v);
    const Vector center = h.ldlt().solve(v.transpose() * u);
    const ReducedForm rf = lll_reduce(SpdForm(h));
    const double chi = std::sqrt(2.0 * std::log(1e12));
    for (const auto& pt : enumerate_within_radius(rf, center, chi, 100000)) {
      ms.push_back(pt.n);
      logw.push_back(-0.5 * pt.distance_sq);
    }
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double& w : logw) total += (w = std::exp(w - top));

  // Reported parameters: coordinates, ionosphere, code and phase biases.
  std::vector<int> report;
  auto add = [&](int first, int count, const std::string& name) {
    for (int j = 0; j < count; ++j) {
      report.push_back(first - c.p + j);
      out.labels.push_back(name + "[" + std::to_string(j) + "]");
    }
  };
  add(c.coords, c.n_coords, "r");
  add(c.iono, c.n_iono, "iono");
  add(c.code_bias, c.n_code_bias, "code_bias");
  add(c.phase_bias, c.n_phase_bias, "phase_bias");

  const Matrix cov_full = red.k * gpinv * gpinv.transpose() * red.k.transpose();
  out.covariance = Matrix(report.size(), report.size());
  for (std::size_t i = 0; i < report.size(); ++i)
    for (std::size_t j = 0; j < report.size(); ++j) out.covariance(i, j) = cov_full(report[i], report[j]);

  for (std::size_t m = 0; m < ms.size(); ++m) {
    Vector nvec = base_n;
    if (ll.k0 > 0) nvec += bm * ms[m].cast<double>();
    Vector theta = red.k * (gpinv * (yw - red.a * nvec));
    if (d.size() > 0) theta += red.pinv * (d - red.ct * nvec);
    NuisanceMode mode;
    mode.n0 = ms[m];
    mode.weight = logw[m] / total;
    mode.mean = Vector(report.size());
    for (std::size_t i = 0; i < report.size(); ++i) mode.mean(i) = theta(report[i]);
    out.modes.push_back(std::move(mode));
  }
  std::stable_sort(out.modes.begin(), out.modes.end(),
                   [](const NuisanceMode& a, const NuisanceMode& b) { return a.weight > b.weight; });
  return out;
}

AmbiguityModel succeeding_init_model(const Scenario& s, InitKind kind) {
  validate(s);
  if (kind == InitKind::Cold || (kind == InitKind::NonSelf && s.pre_measurement_epochs == 0)) {
    // Only the self kind is informed of the wind-up.
    Scenario cold = s;
    cold.windup_informed = false;
    return build_model(cold);
  }
  if (s.pre_measurement_epochs < 1) {
    throw Error(ErrorCode::InvalidInput, "succeeding initialization needs pre-measurement epochs");
  }
  const bool self = kind == InitKind::Self;
  const SignalLayout lay = layout_of(s.measurement_set);
  const MeasurementSet pre_set = s.pre_measurement_set.value_or(s.measurement_set);
  if (self && pre_set != s.measurement_set) {
    throw Error(ErrorCode::InvalidInput, "self-type initialization reuses the same measurement set");
  }

  // Pre-measurement segment: ambiguities resolved, so only nuisances remain.
  // Another receiver's biases are unrelated to ours.
  SegmentSpec pre = cold_spec(s, layout_of(pre_set), false);
  pre.geometry = segment_geometry(s, true);
  for (NoiseSpec* ns : {&pre.carrier, &pre.code}) {
    ns->time_varying *= s.pre_noise_scale;
    ns->time_constant *= s.pre_noise_scale;
  }
  pre.windup_known = self && s.windup_informed;
  pre.priors.clear();
  add_default_priors(pre, s, self);
  const Columns pc = columns_of(pre);
  std::vector<int> shared_pre = range(pc.iono, pc.n_iono);
  if (self) {
    for (int j : range(pc.code_bias, pc.n_code_bias + pc.n_phase_bias)) shared_pre.push_back(j);
    if (pre.static_coords) {
      for (int j : range(pc.coords, 3)) shared_pre.push_back(j);
    }
  }
  const System pre_sys = build_system(pre);
  const Matrix j_shared = marginal_information(pre_sys, shared_pre);

  // Resolution segment with the carried-over information as its prior.
  SegmentSpec res = cold_spec(s, lay, true);
  res.windup_known = self && s.windup_informed;
  res.priors.clear();
  const Columns rc = columns_of(res);
  std::vector<int> shared_res = range(rc.iono, rc.n_iono);
  if (self) {
    for (int j : range(rc.code_bias, rc.n_code_bias + rc.n_phase_bias)) shared_res.push_back(j);
    if (res.static_coords) {
      for (int j : range(rc.coords, 3)) shared_res.push_back(j);
    }
  } else if (s.bias_precision) {
    std::vector<int> cols = range(rc.code_bias, rc.n_code_bias);
    for (int j : range(rc.phase_bias, rc.n_phase_bias)) cols.push_back(j);
    res.priors.push_back({cols, *s.bias_precision});
  }
  if (!shared_res.empty()) res.priors.push_back({shared_res, j_shared});
  const System res_sys = build_system(res);
  const Matrix mn = marginal_information(res_sys, range(0, res_sys.cols.p));
  return model_from_information(mn, lay, res.k(), res_sys.phase_bias_informative, res.windup_known);
}

std::vector<double> range_error_variance(const Scenario& s) {
  validate(s);
  const SegmentSpec sp = cold_spec(s, layout_of(s.measurement_set), false);
  const System sys = build_system(sp);
  const Columns& c = sys.cols;
  const Matrix j = marginal_information(sys, range(c.coords, c.n_coords));
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(j.rows(), j.cols());
  cod.setThreshold(kRankTolerance);
  cod.compute(j);
  const Matrix cov = cod.pseudoInverse();
  std::vector<double> out;
  for (int i = 0; i < sp.n(); ++i) {
    const int off = sp.static_coords ? 0 : 3 * i;
    const Eigen::Matrix3d ci = cov.block(off, off, 3, 3);
    double acc = 0.0;
    for (const auto& e : sp.geometry[i]) acc += e.dot(ci * e);
    out.push_back(acc / static_cast<double>(sp.k()));
  }
  return out;
}

FloatSolution simulate_float_solution(const AmbiguityModel& model, const IntVector& true_delta_n, std::uint64_t seed,
                                      double noise_scale) {
  if (true_delta_n.size() != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "true ambiguity vector size differs from the model");
  }
  const Matrix l = cholesky(model.form()).lower;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector z(model.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Vector e = l.transpose().triangularView<Eigen::Upper>().solve(z);
  return true_delta_n.cast<double>() + noise_scale * e;
}

}  // namespace ambres::gnss
