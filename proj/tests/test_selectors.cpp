#include <gtest/gtest.h>

#include <cmath>

#include "musel/json_io.hpp"
#include "musel/rng.hpp"
#include "musel/selectors.hpp"

using namespace musel;

namespace {

DenseMatrix identity2() {
  DenseMatrix Z(2, 2);
  Z(0, 0) = 1.0;
  Z(1, 1) = 1.0;
  return Z;
}

}  // namespace

TEST(Mu1, EqualitySystem) {
  Estimate e = mu_selector_1(identity2(), {1.0, 0.0}, 0.0);
  ASSERT_EQ(e.status, EstimateStatus::ok);
  EXPECT_NEAR(e.theta_hat[0], 1.0, 1e-9);
  EXPECT_NEAR(e.theta_hat[1], 0.0, 1e-9);
  EXPECT_EQ(e.support, (std::vector<std::size_t>{0}));
  EXPECT_NEAR(e.l1_norm, 1.0, 1e-9);
}

TEST(Mu1, DeltaTenthShrinks) {
  Estimate e = mu_selector_1(identity2(), {1.0, 0.0}, 0.1);
  ASSERT_EQ(e.status, EstimateStatus::ok);
  EXPECT_NEAR(e.l1_norm, 10.0 / 11.0, 1e-9);
  EXPECT_NEAR(e.theta_hat[0], 10.0 / 11.0, 1e-9);
  EXPECT_NEAR(e.theta_hat[1], 0.0, 1e-9);
}

TEST(Mu1, ZeroDesignForcesLargeNorm) {
  DenseMatrix Z(1, 1, 0.0);
  Estimate e = mu_selector_1(Z, {1.0}, 0.1);
  ASSERT_EQ(e.status, EstimateStatus::ok);
  EXPECT_NEAR(e.l1_norm, 10.0, 1e-8);
  EXPECT_NEAR(e.objective_gap, 0.0, 1e-8);
}

TEST(Mu1, InfeasibleWithTinyBall) {
  Estimate e = mu_selector_1(identity2(), {1.0, 0.0}, 0.0, FeasibleSet::l1ball(0.5));
  EXPECT_EQ(e.status, EstimateStatus::infeasible);
  EXPECT_TRUE(e.theta_hat.empty());
}

TEST(Mu2, MatchesDantzigWhenDeltaZero) {
  Rng rng(101);
  DenseMatrix Z(10, 15);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 15; ++j) Z(i, j) = rng.normal();
  }
  Vector y(10);
  for (double& v : y) v = rng.normal();
  SelectorConfig cfg;
  cfg.variant = Variant::MU2;
  cfg.delta = 0.0;
  cfg.epsilon = 0.05;
  Estimate mu = mu_selector_2(Z, y, cfg);
  Estimate dz = dantzig(Z, y, 0.05);
  ASSERT_EQ(mu.status, EstimateStatus::ok);
  ASSERT_EQ(dz.status, EstimateStatus::ok);
  EXPECT_NEAR(mu.l1_norm + mu.objective_gap, dz.l1_norm + dz.objective_gap, 1e-8);
  EXPECT_DOUBLE_EQ(mu.lambda, 0.0);
}

TEST(Mu2, NoiselessTruthIsFeasible) {
  Rng rng(103);
  DenseMatrix raw(20, 30);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 30; ++j) raw(i, j) = rng.normal();
  }
  DenseMatrix Z = normalize_design(raw).matrix;
  Vector theta_star(30, 0.0);
  theta_star[3] = 1.0;
  theta_star[11] = -0.5;
  Vector y = matvec(Z, theta_star);
  SelectorConfig cfg;
  cfg.variant = Variant::MU2;
  Estimate e = mu_selector_2(Z, y, cfg);
  ASSERT_EQ(e.status, EstimateStatus::ok);
  EXPECT_NEAR(residual_corr(Z, y, e.theta_hat), 0.0, 1e-7);
  EXPECT_LE(e.l1_norm, norm_l1(theta_star) + 1e-9);
}

TEST(Mu2, ScalarShrinkageToEpsilonBoundary) {
  const double rt2 = std::sqrt(2.0);
  DenseMatrix Z(2, 2);
  Z(0, 0) = rt2;
  Z(1, 1) = rt2;
  SelectorConfig cfg;
  cfg.variant = Variant::MU2;
  cfg.epsilon = 0.25;
  Estimate e = mu_selector_2(Z, {rt2, 0.0}, cfg);
  ASSERT_EQ(e.status, EstimateStatus::ok);
  EXPECT_NEAR(e.theta_hat[0], 0.75, 1e-9);
  EXPECT_NEAR(e.theta_hat[1], 0.0, 1e-9);
}

TEST(Dantzig, SharesOraclesWithMu2) {
  const double rt2 = std::sqrt(2.0);
  DenseMatrix Z(2, 2);
  Z(0, 0) = rt2;
  Z(1, 1) = rt2;
  Estimate e = dantzig(Z, {rt2, 0.0}, 0.25);
  ASSERT_EQ(e.status, EstimateStatus::ok);
  EXPECT_NEAR(e.theta_hat[0], 0.75, 1e-9);
  EXPECT_EQ(e.variant, Variant::Dantzig);
}

TEST(PaperLambdaRule, ResolvesFromDelta) {
  SelectorConfig cfg;
  cfg.delta = 0.1;
  EXPECT_NEAR(cfg.lambda(), 0.11, 1e-15);
  cfg.delta = 0.0;
  EXPECT_DOUBLE_EQ(cfg.lambda(), 0.0);
  cfg.lambda_is_explicit = true;
  cfg.lambda_explicit = 0.42;
  EXPECT_DOUBLE_EQ(cfg.lambda(), 0.42);
}

TEST(Threshold, Examples) {
  Estimate e;
  e.status = EstimateStatus::ok;
  e.theta_hat = {0.5, 0.05};
  e.l1_norm = 0.55;
  e.support = {0, 1};

  Estimate t = threshold(e, 0.1);
  EXPECT_DOUBLE_EQ(t.theta_hat[0], 0.5);
  EXPECT_DOUBLE_EQ(t.theta_hat[1], 0.0);
  EXPECT_EQ(t.support, (std::vector<std::size_t>{0}));

  Estimate same = threshold(e, 0.0);
  EXPECT_DOUBLE_EQ(same.theta_hat[0], 0.5);
  EXPECT_DOUBLE_EQ(same.theta_hat[1], 0.05);

  Estimate zero = threshold(e, 0.5);
  EXPECT_TRUE(zero.support.empty());
  EXPECT_DOUBLE_EQ(zero.l1_norm, 0.0);

  // Idempotence.
  Estimate tt = threshold(t, 0.1);
  EXPECT_EQ(tt.theta_hat, t.theta_hat);
}

TEST(TauStar, Values) {
  EXPECT_DOUBLE_EQ(tau_star(0.0, 123.0, 2.0), 0.0);
  EXPECT_NEAR(tau_star(0.1, 1.0, 2.0), 0.29428090415820635, 1e-12);
  double prev = tau_star(0.1, 1.0, 1.5);
  for (double alpha : {2.0, 4.0, 16.0, 1024.0, 1e6}) {
    const double cur = tau_star(0.1, 1.0, alpha);
    EXPECT_LT(cur, prev);
    EXPECT_GT(cur, 0.2);
    prev = cur;
  }
  EXPECT_THROW(tau_star(0.1, 1.0, 1.0), std::invalid_argument);
}

TEST(Tau1, Values) {
  EXPECT_NEAR(tau1(Tau1Kind::B1, 0.5, 0.0, 2.0, 0.0, 1.0), 7.0 / 3.0, 1e-12);
  EXPECT_NEAR(tau1(Tau1Kind::B2, 0.5, 0.0, 2.0, 1.0), 14.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(tau1(Tau1Kind::B1, 0.0, 0.0, 2.0, 0.0, 3.0), 0.0);
  EXPECT_THROW(tau1(Tau1Kind::B1, 0.1, 0.1, 2.0, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(tau1(Tau1Kind::B2, 0.1, 0.1, 1.0, 1.0), std::invalid_argument);
}

TEST(EpsilonRule, Values) {
  EXPECT_DOUBLE_EQ(epsilon_rule(0.3, 0.0, 50, 100), 0.0);
  EXPECT_NEAR(epsilon_rule(0.0, 1.0, 3, 3), 0.8558085022044397, 1e-12);
  // The settings used throughout the simulation study.
  EXPECT_NEAR(epsilon_rule(0.1, 0.05 / 1.96, 100, 500), 0.009893010939044905, 1e-12);
  EXPECT_THROW(epsilon_rule(0.0, 1.0, 10, 1), std::invalid_argument);
}

TEST(Support, Examples) {
  EXPECT_EQ(support({0.5, 0.0, 1e-12}, 1e-8), (std::vector<std::size_t>{0}));
  EXPECT_TRUE(support({0.0, 0.0}).empty());
  EXPECT_EQ(support({-3.0, 2.0}, 0.0), (std::vector<std::size_t>{0, 1}));
}

TEST(EstimateJson, FieldList) {
  Estimate e;
  e.status = EstimateStatus::ok;
  e.variant = Variant::MU2;
  e.delta = 0.1;
  e.epsilon = 0.25;
  e.lambda = 0.11;
  e.theta_hat = {0.75, 0.0};
  e.support = {0};
  e.l1_norm = 0.75;
  nlohmann::json j = e;
  EXPECT_EQ(j.dump(),
            "{\"delta\":0.1,\"epsilon\":0.25,\"l1_norm\":0.75,\"lambda\":0.11,"
            "\"support\":[0],\"theta\":[0.75,0.0],\"variant\":\"MU2\"}");
}

TEST(Estimate, L1NormMatchesThetaHat) {
  Rng rng(107);
  DenseMatrix Z(8, 12);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 12; ++j) Z(i, j) = rng.normal();
  }
  Vector y(8);
  for (double& v : y) v = rng.normal();
  Estimate e = mu_selector_1(Z, y, 0.05);
  ASSERT_EQ(e.status, EstimateStatus::ok);
  EXPECT_NEAR(e.l1_norm, norm(e.theta_hat, NormKind::l1), 1e-12);
  for (std::size_t j : e.support) EXPECT_GT(std::fabs(e.theta_hat[j]), kSupportTol);
}
