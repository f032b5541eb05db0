#include <gtest/gtest.h>

#include <random>

#include "ambres/lattice.hpp"
#include "oracles.hpp"

using namespace ambres;

TEST(SpdForm, AveragesSmallAsymmetry) {
  Matrix m(2, 2);
  m << 2.0, 1.0 + 1e-12, 1.0, 3.0;
  const SpdForm f(m);
  EXPECT_DOUBLE_EQ(f(0, 1), f(1, 0));
  EXPECT_GT(f.symmetry_residual(), 0.0);
}

TEST(SpdForm, RejectsAsymmetricInput) {
  Matrix m(2, 2);
  m << 2.0, 1.5, 1.0, 3.0;
  try {
    SpdForm f(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AsymmetricInput);
  }
}

TEST(SpdForm, RejectsNonSquare) {
  EXPECT_THROW(SpdForm(Matrix::Zero(2, 3)), Error);
}

TEST(Cholesky, ReconstructsAndRejectsIndefinite) {
  std::mt19937_64 rng(3);
  const Matrix m = oracle::random_form(5, rng);
  const CholeskyFactor c = cholesky(SpdForm(m));
  EXPECT_LT((c.lower * c.lower.transpose() - m).norm(), 1e-12 * m.norm());
  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  try {
    cholesky(SpdForm(bad));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}

TEST(Unimodular, ExactInverseAndDeterminant) {
  IntMatrix z(3, 3);
  z << 1, 2, 0, 0, 1, 3, 1, 2, 1;
  EXPECT_EQ(std::abs(integer_determinant(z)), 1);
  const IntMatrix zi = unimodular_inverse(z);
  EXPECT_TRUE((z * zi).isIdentity());
  const UnimodularTransform t(z);
  const IntVector n = (IntVector(3) << 4, -2, 7).finished();
  EXPECT_EQ(t.apply_inverse(t.apply(n)), n);
}

TEST(Unimodular, RejectsDeterminantTwo) {
  IntMatrix z(2, 2);
  z << 2, 0, 0, 1;
  try {
    UnimodularTransform t(z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotUnimodular);
  }
}

TEST(Lll, PreservesLatticeAndReducesOrthogonalityDefect) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + trial % 5;
    const Matrix base = oracle::random_form(p, rng);
    // Skew the basis with a random unimodular matrix.
    IntMatrix u = IntMatrix::Identity(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) u(i, j) = coef(rng);
    const Matrix ud = u.cast<double>();
    const Matrix m = ud.transpose() * base * ud;
    const ReducedForm r = lll_reduce(SpdForm(0.5 * (m + m.transpose())));
    const Matrix zi = r.transform.inverse().cast<double>();
    const Matrix back = zi.transpose() * m * zi;
    EXPECT_LT((back - r.reduced.entries()).norm(), 1e-9 * m.norm());
    EXPECT_LT((r.layers.transpose() * r.layers - r.reduced.entries()).norm(), 1e-9 * m.norm());
    EXPECT_NEAR(log_determinant(r.reduced), log_determinant(SpdForm(0.5 * (m + m.transpose()))), 1e-8);
    EXPECT_LE(r.reduced.entries().diagonal().prod(), m.diagonal().prod() * (1.0 + 1e-9));
    // Size reduction in the layer factor.
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < i; ++j) EXPECT_LE(std::abs(r.layers(i, j) / r.layers(i, i)), 0.5 + 1e-9);
  }
}

TEST(Lll, BlockBoundaryKeepsSecondBlockClosed) {
  std::mt19937_64 rng(5);
  const Matrix m = oracle::random_form(5, rng);
  const ReducedForm r = lll_reduce(SpdForm(m), 1.0, 3);
  const IntMatrix& zi = r.transform.inverse();
  EXPECT_EQ(zi.topRightCorner(3, 2).cwiseAbs().maxCoeff(), 0);
  EXPECT_EQ(r.transform.matrix().topRightCorner(3, 2).cwiseAbs().maxCoeff(), 0);
}

TEST(QuadraticForm, IntegerAndRealAgree) {
  Matrix m(2, 2);
  m << 2, 1, 1, 3;
  const IntVector n = (IntVector(2) << 1, -2).finished();
  EXPECT_DOUBLE_EQ(quadratic_form(SpdForm(m), n), 2 - 4 + 12);
  EXPECT_DOUBLE_EQ(quadratic_form(SpdForm(m), Vector(n.cast<double>())), 10.0);
}

TEST(ComplexityEstimate, GrowsWithRadius) {
  std::mt19937_64 rng(7);
  const Matrix r = layer_factor(SpdForm(oracle::random_form(4, rng)));
  EXPECT_LT(complexity_estimate(r, 1.0), complexity_estimate(r, 3.0));
}
