#include <cmath>

#include <gtest/gtest.h>

#include "ddc/ml_solver.hpp"

using namespace ddc;

namespace {
const DataModelSpec kGm10{ModelKind::GaussianMixture, std::sqrt(10.0), 0.5};
const FeatureMap kGmLinear = FeatureMap::linear(std::sqrt(10.0), 3.0);
}  // namespace

TEST(MlSolver, AbsoluteRiskAnchors) {
  const double expected[] = {0.434, 0.429, 0.428};
  const double r_values[] = {5.0, 10.0, 25.0};
  for (int i = 0; i < 3; ++i) {
    const DataModelSpec model{ModelKind::Logistic, r_values[i], 0.5};
    const FeatureMap map = FeatureMap::polynomial(r_values[i], 2.0);
    const MlSolution sol = solve_ml(model, map, 0.05);
    ASSERT_TRUE(sol.converged);
    const auto pr = ml_predictions(sol, model, noise_at(model, map, 0.05));
    EXPECT_NEAR(pr.risk, expected[i], 0.005) << r_values[i];
  }
}

TEST(MlSolver, LogisticMatchesIndependentSolver) {
  const DataModelSpec model{ModelKind::Logistic, 10.0, 0.5};
  const FeatureMap map = FeatureMap::polynomial(10.0, 2.0);
  const NoiseModelV v = noise_at(model, map, 0.05);
  const MlSolution sol = solve_ml(v, 0.05);
  EXPECT_NEAR(sol.mu, 0.5352753120344556, 1e-8);
  EXPECT_NEAR(sol.alpha, 0.49810861065237205, 1e-8);
  EXPECT_NEAR(sol.lambda, 0.23547899964412025, 1e-8);
  EXPECT_NEAR(ml_predictions(sol, model, v).risk, 0.42950390102044306, 1e-9);

  const DataModelSpec m5{ModelKind::Logistic, 5.0, 0.5};
  const NoiseModelV v5 = noise_at(m5, FeatureMap::polynomial(5.0, 2.0), 0.05);
  EXPECT_NEAR(ml_predictions(solve_ml(v5, 0.05), m5, v5).risk, 0.43407437723132136, 1e-9);
}

TEST(MlSolver, GaussianMixtureMatchesIndependentSolver) {
  const NoiseModelV v = noise_at(kGm10, kGmLinear, 0.1);
  const MlSolution sol = solve_ml(v, 0.1);
  EXPECT_NEAR(sol.mu, 1.3084926684472422, 1e-8);
  EXPECT_NEAR(sol.alpha, 0.8831381997158511, 1e-8);
  EXPECT_NEAR(sol.lambda, 0.6889113616600481, 1e-8);
  const auto pr = ml_predictions(sol, kGm10, v);
  EXPECT_NEAR(pr.risk, 0.31612868424650153, 1e-9);
  EXPECT_NEAR(pr.cosine, 0.15133143178464475, 1e-9);
}

TEST(MlSolver, ResidualsSmallAtSolution) {
  const NoiseModelV v = noise_at(kGm10, kGmLinear, 0.2);
  const MlSolution sol = solve_ml(v, 0.2);
  EXPECT_LE(sol.max_residual(), 1e-6);
  const auto gm = ml_gm_residuals(sol.mu, sol.alpha, sol.lambda, 0.2, v.s);
  for (double r : gm) EXPECT_LE(std::abs(r), 1e-6);
  const auto two = ml_residuals(sol.mu, sol.alpha, sol.lambda, 0.2, v, {}, true);
  for (double r : two) EXPECT_LE(std::abs(r), 1e-6);
}

TEST(MlSolver, GaussianMixtureReductionAgreesWithGenericPath) {
  const NoiseModelV v = noise_at(kGm10, kGmLinear, 0.15);
  for (double mu : {0.3, 1.0, 2.0}) {
    for (double alpha : {0.5, 1.5}) {
      const auto a = ml_residuals(mu, alpha, 0.8, 0.15, v);
      const auto b = ml_residuals(mu, alpha, 0.8, 0.15, v, {}, true);
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-8);
    }
  }
}

TEST(MlSolver, ConvergedSolutionIsFixedPoint) {
  const NoiseModelV v = noise_at(kGm10, kGmLinear, 0.1);
  const MlSolution sol = solve_ml(v, 0.1);
  const detail::MlMoments moments(v, QuadratureSpec{});
  const auto next = detail::gauss_seidel_sweep(moments, sol.mu, sol.alpha, sol.lambda, 0.1);
  EXPECT_LE(std::abs(next[0] - sol.mu), 1e-8);
  EXPECT_LE(std::abs(next[1] - sol.alpha), 1e-8);
  EXPECT_LE(std::abs(next[2] - sol.lambda), 1e-8);
}

TEST(MlSolver, PureGaussSeidelAgreesWithPolishedSolve) {
  const NoiseModelV v = noise_at(kGm10, kGmLinear, 0.1);
  MlOptions plain;
  plain.newton_after = 0;
  const MlSolution a = solve_ml(v, 0.1, plain);
  const MlSolution b = solve_ml(v, 0.1);
  EXPECT_NEAR(a.mu, b.mu, 1e-8);
  EXPECT_NEAR(a.alpha, b.alpha, 1e-8);
  EXPECT_NEAR(a.lambda, b.lambda, 1e-8);
}

TEST(MlSolver, NormGrowsTowardThreshold) {
  const double ks = solve_kappa_star(kGm10, kGmLinear).kappa_star;
  double prev = 0.0;
  for (double k : {0.05, 0.1, 0.15, 0.2, 0.25, ks - 0.01}) {
    const MlSolution sol = solve_ml(noise_at(kGm10, kGmLinear, k), k);
    const double norm = std::hypot(sol.mu, sol.alpha);
    EXPECT_GT(norm, prev) << k;
    prev = norm;
  }
}

TEST(MlSolver, RegimeGuard) {
  const double ks = solve_kappa_star(kGm10, kGmLinear).kappa_star;
  EXPECT_THROW(solve_ml(kGm10, kGmLinear, ks, ks), NotInRegime);
  EXPECT_THROW(solve_ml(kGm10, kGmLinear, ks + 0.1, ks), NotInRegime);
}

TEST(MlSolver, IterationCapReportsLastIterate) {
  MlOptions opt;
  opt.max_iterations = 2;
  opt.newton_after = 0;
  try {
    solve_ml(noise_at(kGm10, kGmLinear, 0.1), 0.1, opt);
    FAIL() << "expected MlNoConvergence";
  } catch (const MlNoConvergence& e) {
    EXPECT_EQ(e.last().iterations, 2);
    EXPECT_FALSE(e.last().converged);
  }
}

TEST(MlPredictions, Examples) {
  const NoiseModelV gm = NoiseModelV::make(NoiseKind::GmShifted, 2.0, 1.0);
  EXPECT_NEAR(linear_rule_risk(1.0, 1.0, gm), 0.23975006109347674, 1e-6);
  EXPECT_NEAR(linear_rule_risk(1.0, 1.0, gm, {}), linear_rule_risk_quadrature(1.0, 1.0, gm), 1e-9);
  EXPECT_NEAR(linear_rule_risk(1.0, 1e-9, gm), normal_tail(1.0), 1e-8);
  MlSolution sol;
  sol.mu = 0.0;
  sol.alpha = 1.0;
  const NoiseModelV lg = NoiseModelV::make(NoiseKind::LogisticGY, 5.0, 2.0);
  const auto pr = ml_predictions(sol, {ModelKind::Logistic, 5.0, 0.5}, lg);
  EXPECT_NEAR(pr.cosine, 0.0, 1e-15);
  EXPECT_NEAR(pr.risk, 0.5, 1e-12);
}

TEST(MlPredictions, RiskScaleInvariant) {
  const NoiseModelV lg = NoiseModelV::make(NoiseKind::LogisticGY, 10.0, 4.0);
  for (double c : {0.01, 3.0, 250.0}) {
    EXPECT_NEAR(linear_rule_risk(0.7 * c, 1.1 * c, lg), linear_rule_risk(0.7, 1.1, lg), 1e-10);
  }
}

TEST(MlPredictions, GaussianMixtureClosedFormAgreesWithQuadrature) {
  for (double s : {0.5, 1.0, 2.0}) {
    const NoiseModelV gm = NoiseModelV::make(NoiseKind::GmShifted, 3.0, s);
    for (double mu : {0.1, 1.0, 3.0}) {
      EXPECT_NEAR(linear_rule_risk(mu, 0.8, gm), linear_rule_risk_quadrature(mu, 0.8, gm), 1e-8);
    }
  }
}
