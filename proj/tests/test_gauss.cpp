#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "klper/gauss.hpp"
#include "oracles.hpp"

using namespace klper;

namespace {

BatchPolicy make_policy(Vector mean, Matrix cov) { return {std::move(mean), std::move(cov)}; }

// Independent two-pass covariance with plain loops.
Matrix loop_covariance(const Matrix& x) {
  const auto b = x.rows(), l = x.cols();
  std::vector<double> mu(static_cast<std::size_t>(l), 0.0);
  for (Eigen::Index j = 0; j < l; ++j) {
    for (Eigen::Index i = 0; i < b; ++i) mu[static_cast<std::size_t>(j)] += x(i, j);
    mu[static_cast<std::size_t>(j)] /= static_cast<double>(b);
  }
  Matrix c(l, l);
  for (Eigen::Index p = 0; p < l; ++p) {
    for (Eigen::Index q = 0; q < l; ++q) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < b; ++i) {
        s += (x(i, p) - mu[static_cast<std::size_t>(p)]) * (x(i, q) - mu[static_cast<std::size_t>(q)]);
      }
      c(p, q) = s / static_cast<double>(b - 1);
    }
  }
  return c;
}

} // namespace

TEST(FitBatchPolicy, ZeroDeltasGiveRegularizationFloor) {
  const BatchPolicy p = fit_batch_policy(Matrix::Zero(64, 2));
  EXPECT_TRUE((p.mean.array() == 0.0).all());
  EXPECT_EQ(p.covariance, kCovarianceRegularization * Matrix::Identity(2, 2));
}

TEST(FitBatchPolicy, TwoSampleHandCase) {
  Matrix d(2, 1);
  d << 0.0, 0.2;
  const BatchPolicy p = fit_batch_policy(d);
  EXPECT_NEAR(p.mean[0], 0.1, 1e-15);
  EXPECT_NEAR(p.covariance(0, 0), 0.02 + 1e-6, 1e-15);
  EXPECT_EQ(fit_batch_policy(d, 0.0).covariance(0, 0), p.covariance(0, 0) - 1e-6);
}

TEST(FitBatchPolicy, MatchesLoopOracleAndIsSymmetric) {
  Rng rng(31);
  for (Eigen::Index l : {1, 2, 3, 6}) {
    const Matrix x = oracle::random_matrix(rng, 50, l, 0.3);
    const BatchPolicy p = fit_batch_policy(x, 0.0);
    const Matrix ref = loop_covariance(x);
    EXPECT_LE((p.covariance - ref).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(p.covariance, p.covariance.transpose());
  }
}

TEST(FitBatchPolicy, PermutationInvariantWithinRounding) {
  Rng rng(32);
  Matrix x = oracle::random_matrix(rng, 40, 3);
  const BatchPolicy a = fit_batch_policy(x);
  Matrix y = x.colwise().reverse();
  const BatchPolicy b = fit_batch_policy(y);
  EXPECT_LE((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((a.covariance - b.covariance).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FitBatchPolicy, SampleMomentsOfKnownGaussian) {
  Rng rng(33);
  const int b = 1000;
  Matrix x(b, 1);
  for (int i = 0; i < b; ++i) x(i, 0) = 0.3 + 0.05 * standard_normal(rng);
  const BatchPolicy p = fit_batch_policy(x, 0.0);
  const double se_mean = 0.05 / std::sqrt(b);
  const double se_var = 0.0025 * std::sqrt(2.0 / (b - 1));
  EXPECT_NEAR(p.mean[0], 0.3, 3 * se_mean);
  EXPECT_NEAR(p.covariance(0, 0), 0.0025, 3 * se_var);
}

TEST(FitBatchPolicy, TooFewSamples) {
  EXPECT_THROW(fit_batch_policy(Matrix::Zero(1, 2)), NumericalError);
  EXPECT_THROW(fit_batch_policy(Matrix::Zero(0, 2)), NumericalError);
}

TEST(KlToIsotropic, IdenticalDistributionsGiveZero) {
  for (double sigma : {0.1, 0.2, 1.7}) {
    for (std::size_t l : {1u, 2u, 6u}) {
      const auto L = static_cast<Eigen::Index>(l);
      const double k = kl_to_isotropic(make_policy(Vector::Zero(L), sigma * Matrix::Identity(L, L)),
                                       KlTarget(sigma, l));
      EXPECT_NEAR(k, 0.0, 1e-12);
    }
  }
}

TEST(KlToIsotropic, WorkedTwoDimensionalCase) {
  Vector mu(2);
  mu << 0.1, 0.0;
  const double k = kl_to_isotropic(make_policy(mu, 0.1 * Matrix::Identity(2, 2)), KlTarget(0.1, 2));
  const double hand = 0.5 * ((0.2 + 0.01) / 0.1 - 2.0 + 2.0 * std::log(0.1) - std::log(0.01));
  EXPECT_NEAR(hand, 0.05, 1e-12);
  EXPECT_NEAR(k, 0.05, 1e-12);
}

TEST(KlToIsotropic, WorkedOneDimensionalCase) {
  for (double sigma : {0.05, 0.1, 2.0}) {
    Matrix cov(1, 1);
    cov << sigma / std::numbers::e;
    const double k = kl_to_isotropic(make_policy(Vector::Zero(1), cov), KlTarget(sigma, 1));
    EXPECT_NEAR(k, 1.0 / (2.0 * std::numbers::e), 1e-12);
  }
}

TEST(KlToIsotropic, IncreasesWithMeanScale) {
  Rng rng(34);
  for (int c = 0; c < 10; ++c) {
    const Matrix x = oracle::random_matrix(rng, 30, 3, 0.2);
    BatchPolicy p = fit_batch_policy(x);
    p.mean = p.mean.cwiseAbs() + Vector::Constant(3, 0.01);
    const KlTarget t(0.1, 3);
    double prev = kl_to_isotropic(p, t);
    for (double s : {1.5, 2.0, 4.0}) {
      BatchPolicy q = p;
      q.mean *= s;
      const double k = kl_to_isotropic(q, t);
      EXPECT_GT(k, prev);
      prev = k;
    }
  }
}

TEST(KlToIsotropic, NonNegativeOnRandomPolicies) {
  Rng rng(35);
  for (int c = 0; c < 50; ++c) {
    const Matrix x = oracle::random_matrix(rng, 20, 2, 0.5);
    EXPECT_GE(kl_to_isotropic(fit_batch_policy(x), KlTarget(0.3, 2)), -1e-12);
  }
}

TEST(KlToIsotropic, Errors) {
  EXPECT_THROW(KlTarget(0.0, 2), ConfigError);
  EXPECT_THROW(KlTarget(-1.0, 2), ConfigError);
  EXPECT_THROW(KlTarget(0.1, 0), ConfigError);
  const BatchPolicy singular = make_policy(Vector::Zero(2), Matrix::Zero(2, 2));
  EXPECT_THROW(kl_to_isotropic(singular, KlTarget(0.1, 2)), NumericalError);
  const BatchPolicy p = make_policy(Vector::Zero(2), Matrix::Identity(2, 2));
  EXPECT_THROW(kl_to_isotropic(p, KlTarget(0.1, 3)), ShapeError);
}

TEST(LogDet, MatchesDiagonalProduct) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 2.0, 0.5, 3.0;
  EXPECT_NEAR(log_det_spd(d), std::log(3.0), 1e-14);
  const auto [inv, ld] = detail::lu_inverse_logdet(d);
  EXPECT_NEAR(ld, std::log(3.0), 1e-14);
  EXPECT_LE((inv * d - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MonteCarloOracle, PolicyEqualsTarget) {
  const MonteCarloEstimate e =
      kl_monte_carlo_oracle(make_policy(Vector::Zero(2), 0.2 * Matrix::Identity(2, 2)),
                            KlTarget(0.2, 2), 100000, 1);
  EXPECT_LE(std::abs(e.estimate), 3 * e.std_error + 1e-12);
}

TEST(MonteCarloOracle, AgreesWithWorkedCases) {
  Vector mu(2);
  mu << 0.1, 0.0;
  const auto two = kl_monte_carlo_oracle(make_policy(mu, 0.1 * Matrix::Identity(2, 2)),
                                         KlTarget(0.1, 2), 1000000, 2);
  EXPECT_LE(std::abs(two.estimate - 0.05), 3 * two.std_error);

  Matrix cov(1, 1);
  cov << 0.1 / std::numbers::e;
  const auto one = kl_monte_carlo_oracle(make_policy(Vector::Zero(1), cov), KlTarget(0.1, 1), 1000000, 3);
  EXPECT_LE(std::abs(one.estimate - 1.0 / (2.0 * std::numbers::e)), 3 * one.std_error);
}

TEST(MonteCarloOracle, Errors) {
  const BatchPolicy p = make_policy(Vector::Zero(1), Matrix::Identity(1, 1));
  EXPECT_THROW(kl_monte_carlo_oracle(p, KlTarget(1.0, 1), 100, 0), ConfigError);
  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(kl_monte_carlo_oracle(make_policy(Vector::Zero(2), indefinite), KlTarget(1.0, 2), 10000, 0),
               NumericalError);
}
