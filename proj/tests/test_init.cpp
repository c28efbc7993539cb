#include <gtest/gtest.h>

#include <Eigen/Core>
#include <cmath>

#include "rmu/errors.hpp"
#include "rmu/init.hpp"
#include "rmu/rng.hpp"
#include "util.hpp"

using rmu::MatrixX;
using rmu::VectorX;

TEST(NnsvdInit, FactorsAreNonnegativeWithRightShapes) {
  rmu::Rng rng(50);
  MatrixX<double> x = testutil::random_matrix(rng, 12, 20);
  rmu::NnsvdFactors<double> f = rmu::nnsvd_init(x, 4);
  EXPECT_EQ(f.W.rows(), 12);
  EXPECT_EQ(f.W.cols(), 4);
  EXPECT_EQ(f.H.rows(), 4);
  EXPECT_EQ(f.H.cols(), 20);
  EXPECT_GE(f.W.minCoeff(), 0.0);
  EXPECT_GE(f.H.minCoeff(), 0.0);
}

TEST(NnsvdInit, RecoversARankOneMatrixExactly) {
  rmu::Rng rng(51);
  VectorX<double> w = testutil::random_matrix(rng, 9, 1, 0.2, 1.0);
  VectorX<double> v = testutil::random_matrix(rng, 7, 1, 0.2, 1.0);
  MatrixX<double> x = w * v.transpose();
  rmu::NnsvdFactors<double> f = rmu::nnsvd_init(x, 1);
  EXPECT_LE((f.W * f.H - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NnsvdInit, DeterministicAcrossCalls) {
  rmu::Rng rng(52);
  MatrixX<double> x = testutil::random_matrix(rng, 10, 15);
  rmu::NnsvdFactors<double> f1 = rmu::nnsvd_init(x, 3);
  rmu::NnsvdFactors<double> f2 = rmu::nnsvd_init(x, 3);
  EXPECT_EQ(f1.W, f2.W);
  EXPECT_EQ(f1.H, f2.H);
}

TEST(NnsvdInit, LeadingComponentCarriesTheScale) {
  // for nonnegative X the top singular pair is nonnegative (Perron-Frobenius),
  // so the rank-1 section alone should already approximate X.
  rmu::Rng rng(53);
  MatrixX<double> x = testutil::random_matrix(rng, 8, 8, 0.5, 1.0);
  rmu::NnsvdFactors<double> f = rmu::nnsvd_init(x, 3);
  const double res1 = (x - f.W.col(0) * f.H.row(0)).norm();
  EXPECT_LT(res1, x.norm());
  const double res3 = (x - f.W * f.H).norm();
  EXPECT_LE(res3, res1 + 1e-12);
}

TEST(NnsvdInit, RejectsBadRankAndNegativeInput) {
  rmu::Rng rng(54);
  MatrixX<double> x = testutil::random_matrix(rng, 5, 6);
  EXPECT_THROW(rmu::nnsvd_init(x, 0), rmu::RankTooLargeError);
  EXPECT_THROW(rmu::nnsvd_init(x, 6), rmu::RankTooLargeError);
  x(2, 2) = -0.4;
  EXPECT_THROW(rmu::nnsvd_init(x, 2), rmu::NegativeEntryError);
}

TEST(Feasibilize, LiftsZerosAndLandsOnTheSimplex) {
  MatrixX<double> h(3, 2);
  h << 0.5, 0.0, 0.5, 0.0, 0.0, 1.0;
  MatrixX<double> out = rmu::feasibilize(h, 1e-6);
  EXPECT_GT(out.minCoeff(), 0.0);
  EXPECT_LE((out.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-15);
  // entries that were zero sit near the floor, not above old mass
  EXPECT_LT(out(2, 0), out(0, 0));

  MatrixX<double> all_zero = MatrixX<double>::Zero(4, 3);
  MatrixX<double> uniform = rmu::feasibilize(all_zero);
  EXPECT_TRUE(uniform.isApproxToConstant(0.25, 1e-15));

  EXPECT_THROW(rmu::feasibilize(h, 0.0), rmu::ConfigError);
  h(0, 0) = -1.0;
  EXPECT_THROW(rmu::feasibilize(h), rmu::NegativeEntryError);
}

TEST(SelectLambda, BalancesFitAgainstPenalty) {
  MatrixX<double> x(2, 1), w(2, 1), h(1, 1);
  x << 3, 0;
  w << 1, 0;
  h << 1;
  // residual (2, 0): fit 0.5 * 4 = 2, quasi-norm 1
  const double lambda = rmu::select_lambda(x, w, h);
  EXPECT_DOUBLE_EQ(lambda, 2.0);

  MatrixX<double> h_zero = MatrixX<double>::Zero(1, 1);
  EXPECT_THROW(rmu::select_lambda(x, w, h_zero), rmu::DegeneratePenaltyError);
  MatrixX<double> w_bad(3, 1);
  EXPECT_THROW(rmu::select_lambda(x, w_bad, h), rmu::DimensionMismatchError);
}

TEST(SelectLambda, MatchesDirectFormulaOnRandomData) {
  rmu::Rng rng(55);
  MatrixX<double> x = testutil::random_matrix(rng, 8, 10);
  MatrixX<double> w = testutil::random_matrix(rng, 8, 3);
  MatrixX<double> h = testutil::random_simplex(rng, 3, 10);
  const double expect = 0.5 * (x - w * h).squaredNorm() / rmu::quasi_norm_half(h);
  EXPECT_NEAR(rmu::select_lambda(x, w, h), expect, 1e-12 * (1.0 + expect));
}

TEST(MakeInitBundle, ProducesAFeasibleStartingPoint) {
  rmu::Rng rng(56);
  MatrixX<double> x = testutil::random_matrix(rng, 15, 25, 0.1, 1.0);
  rmu::InitBundle<double> b = rmu::make_init_bundle<double>(x, 4);
  EXPECT_EQ(b.W_init.cols(), 4);
  EXPECT_GT(b.H_init.minCoeff(), 0.0);
  EXPECT_LE((b.H_init.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_GT(b.lambda, 0.0);

  rmu::NnsvdFactors<double> f = rmu::nnsvd_init(x, 4);
  EXPECT_EQ(b.W_init, f.W);
  const double expect = rmu::select_lambda(x, b.W_init, b.H_init);
  EXPECT_DOUBLE_EQ(b.lambda, expect);
}

TEST(MakeInitBundle, HonorsLambdaOverride) {
  rmu::Rng rng(57);
  MatrixX<double> x = testutil::random_matrix(rng, 10, 12, 0.1, 1.0);
  rmu::InitBundle<double> b = rmu::make_init_bundle<double>(x, 3, 3.5);
  EXPECT_DOUBLE_EQ(b.lambda, 3.5);
}
