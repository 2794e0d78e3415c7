#include <gtest/gtest.h>

#include <cmath>

#include "musel/lasso.hpp"
#include "musel/rng.hpp"
#include "oracles.hpp"

using namespace musel;

namespace {

using oracles::orthonormal_design;

Vector eval_path(const LassoPath& path, double lambda) {
  const auto& k = path.knots;
  if (lambda >= k.front().lambda) return k.front().theta;
  for (std::size_t i = 1; i < k.size(); ++i) {
    if (lambda >= k[i].lambda) {
      const double span = k[i - 1].lambda - k[i].lambda;
      const double w = span > 0.0 ? (lambda - k[i].lambda) / span : 0.0;
      Vector out(k[i].theta.size());
      for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = w * k[i - 1].theta[j] + (1.0 - w) * k[i].theta[j];
      }
      return out;
    }
  }
  return k.back().theta;
}

void expect_kkt(const DenseMatrix& Z, const Vector& y, const LassoPath& path) {
  const DenseMatrix G = gram(Z);
  Vector b = tmatvec(Z, y);
  for (double& v : b) v /= static_cast<double>(Z.rows());
  for (const LassoKnot& kn : path.knots) {
    Vector gt = matvec(G, kn.theta);
    double cmax = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      cmax = std::max(cmax, std::fabs(2.0 * (b[j] - gt[j])));
    }
    EXPECT_LE(cmax, kn.lambda + 1e-7);
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (std::fabs(kn.theta[j]) > 1e-9) {
        EXPECT_NEAR(2.0 * (b[j] - gt[j]), kn.lambda * (kn.theta[j] > 0 ? 1.0 : -1.0), 1e-7);
      }
    }
  }
}

}  // namespace

TEST(LassoPath, ZeroResponseSingleKnot) {
  DenseMatrix Z(4, 3, 1.0);
  Z(0, 0) = -1.0;
  Z(1, 1) = -1.0;
  Z(2, 2) = -1.0;
  LassoPath path = lasso_path(Z, {0.0, 0.0, 0.0, 0.0});
  ASSERT_EQ(path.knots.size(), 1u);
  EXPECT_DOUBLE_EQ(path.knots[0].lambda, 0.0);
  EXPECT_EQ(path.knots[0].df, 0u);
}

TEST(LassoPath, LambdaMaxAndMonotoneKnots) {
  Rng rng(201);
  DenseMatrix Z = orthonormal_design(30, 6, rng);
  Vector theta_star(6, 0.0);
  theta_star[1] = 1.0;
  theta_star[4] = -0.6;
  Vector y = matvec(Z, theta_star);
  for (double& v : y) v += 0.05 * rng.normal();

  LassoPath path = lasso_path(Z, y);
  Vector b = tmatvec(Z, y);
  for (double& v : b) v /= 30.0;
  EXPECT_NEAR(path.knots.front().lambda, 2.0 * norm_linf(b), 1e-12);
  for (std::size_t i = 1; i < path.knots.size(); ++i) {
    EXPECT_LT(path.knots[i].lambda, path.knots[i - 1].lambda);
  }
  expect_kkt(Z, y, path);
}

TEST(LassoPath, OrthonormalMatchesSoftThreshold) {
  Rng rng(203);
  const std::size_t n = 40, p = 8;
  DenseMatrix Z = orthonormal_design(n, p, rng);
  Vector theta_star(p, 0.0);
  theta_star[0] = 0.9;
  theta_star[3] = -0.4;
  theta_star[6] = 0.2;
  Vector y = matvec(Z, theta_star);
  for (double& v : y) v += 0.02 * rng.normal();

  LassoPath path = lasso_path(Z, y);
  Vector b = tmatvec(Z, y);
  for (double& v : b) v /= static_cast<double>(n);

  const double lmax = path.knots.front().lambda;
  for (int t = 0; t < 20; ++t) {
    const double lambda = lmax * (t + 0.5) / 20.0;
    Vector got = eval_path(path, lambda);
    for (std::size_t j = 0; j < p; ++j) {
      EXPECT_NEAR(got[j], oracles::soft_threshold(b[j], lambda / 2.0), 1e-8);
    }
  }
}

TEST(LassoPath, MatchesProxOracleOnWideDesign) {
  Rng rng(207);
  const std::size_t n = 10, p = 25;
  DenseMatrix raw(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) raw(i, j) = rng.normal();
  }
  DenseMatrix Z = normalize_design(raw).matrix;
  Vector theta_star(p, 0.0);
  theta_star[2] = 1.0;
  theta_star[17] = -0.7;
  Vector y = matvec(Z, theta_star);
  for (double& v : y) v += 0.05 * rng.normal();

  LassoPath path = lasso_path(Z, y);
  expect_kkt(Z, y, path);
  ASSERT_GE(path.knots.size(), 3u);
  // Compare interior knots against the generic convex solver.
  for (std::size_t i = 1; i + 1 < path.knots.size(); i += 2) {
    const LassoKnot& kn = path.knots[i];
    if (kn.lambda < 1e-8) continue;
    Vector want = oracles::lasso_prox_oracle(Z, y, kn.lambda);
    for (std::size_t j = 0; j < p; ++j) EXPECT_NEAR(kn.theta[j], want[j], 1e-5);
  }
}

TEST(LassoPath, DuplicateColumnHandledGracefully) {
  Rng rng(209);
  const std::size_t n = 20, p = 5;
  DenseMatrix raw(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j + 1 < p; ++j) raw(i, j) = rng.normal();
    raw(i, p - 1) = raw(i, 0);  // exact duplicate of column 0
  }
  DenseMatrix Z = normalize_design(raw).matrix;
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = Z(i, 0) + 0.1 * rng.normal();
  LassoPath path = lasso_path(Z, y);
  EXPECT_GE(path.knots.size(), 2u);
  expect_kkt(Z, y, path);
}

TEST(LassoCp, RecoversTrueSupportNoiseless) {
  Rng rng(211);
  const std::size_t n = 50, p = 10;
  DenseMatrix Z = orthonormal_design(n, p, rng);
  Vector theta_star(p, 0.0);
  theta_star[1] = 1.0;
  theta_star[5] = 0.5;
  theta_star[8] = -0.75;
  Vector y = matvec(Z, theta_star);

  LassoPath path = lasso_path(Z, y);
  Estimate est = lasso_cp(path, 1e-4, n);
  EXPECT_EQ(est.support, (std::vector<std::size_t>{1, 5, 8}));

  // Brute-force Cp over all knots agrees.
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_df = 0;
  double chosen_lambda = -1.0;
  for (const LassoKnot& kn : path.knots) {
    const double cp = kn.rss / 1e-8 - n + 2.0 * kn.df;
    if (cp < best - 1e-9 || (cp <= best + 1e-9 && kn.df < best_df)) {
      best = cp;
      best_df = kn.df;
      chosen_lambda = kn.lambda;
    }
  }
  EXPECT_DOUBLE_EQ(est.lambda, chosen_lambda);
}

TEST(LassoCp, DegenerateCases) {
  DenseMatrix Z(4, 3, 1.0);
  Z(0, 0) = -1.0;
  Z(1, 1) = -1.0;
  Z(2, 2) = -1.0;
  LassoPath zero = lasso_path(Z, {0.0, 0.0, 0.0, 0.0});
  Estimate e = lasso_cp(zero, 0.5, 4);
  EXPECT_TRUE(e.support.empty());
  EXPECT_EQ(e.variant, Variant::Lasso);

  LassoPath single;
  single.knots.push_back({0.7, {0.0, 1.0}, 1, 2.0});
  Estimate s = lasso_cp(single, 1.0, 4);
  EXPECT_DOUBLE_EQ(s.lambda, 0.7);
  EXPECT_THROW(lasso_cp(LassoPath{}, 1.0, 4), std::invalid_argument);
}

TEST(SigmaPlugin, RecoversNoiseScale) {
  Rng rng(213);
  const std::size_t n = 200, p = 5;
  DenseMatrix raw(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) raw(i, j) = rng.normal();
  }
  DenseMatrix Z = normalize_design(raw).matrix;
  Vector theta_star = {1.0, 0.0, -0.5, 0.0, 0.25};
  Vector y = matvec(Z, theta_star);
  for (double& v : y) v += 0.3 * rng.normal();
  const double sig = sigma_plugin(Z, y, {0, 2, 4});
  EXPECT_NEAR(sig, 0.3, 0.05);
}
