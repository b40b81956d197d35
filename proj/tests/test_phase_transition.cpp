#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ddc/phase_transition.hpp"

using namespace ddc;

namespace {
const DataModelSpec kLogistic10{ModelKind::Logistic, 10.0, 0.5};
const DataModelSpec kGm10{ModelKind::GaussianMixture, std::sqrt(10.0), 0.5};
}  // namespace

TEST(Threshold, ZeroSignalGivesHalf) {
  for (auto kind : {NoiseKind::GmShifted, NoiseKind::LogisticGY}) {
    const NoiseModelV v = NoiseModelV::make(kind, 1.0, 0.0);
    EXPECT_NEAR(threshold_g(v), 0.5, 1e-10);
  }
  for (auto model : {kLogistic10, kGm10}) {
    const auto ph = solve_kappa_star(model, FeatureMap::constant(model.r, 0.0));
    EXPECT_NEAR(ph.kappa_star, 0.5, 1e-6);
  }
}

TEST(Threshold, GaussianMixtureLinearOracle) {
  const auto ph = solve_kappa_star(kGm10, FeatureMap::linear(std::sqrt(10.0), 3.0));
  EXPECT_NEAR(ph.kappa_star, 0.28082689327651533, 1e-9);
  EXPECT_NEAR(ph.g_at_star, ph.kappa_star, 1e-9);
}

TEST(Threshold, GaussianMixturePolynomialOracle) {
  const DataModelSpec gm1{ModelKind::GaussianMixture, 1.0, 0.5};
  EXPECT_NEAR(solve_kappa_star(gm1, FeatureMap::polynomial(1.0, 2.0)).kappa_star,
              0.3728551009297608, 1e-9);
}

TEST(Threshold, LogisticPolynomialOracle) {
  EXPECT_NEAR(solve_kappa_star(kLogistic10, FeatureMap::polynomial(10.0, 2.0)).kappa_star,
              0.383314501540259, 1e-8);
}

TEST(Threshold, ClosedFormAgreesWithQuadrature) {
  for (double s : {0.0, 0.3, 1.0, 2.0, 4.0}) {
    const NoiseModelV v = NoiseModelV::make(NoiseKind::GmShifted, 5.0, s);
    EXPECT_NEAR(threshold_g(v), threshold_g_quadrature(v), 1e-8) << s;
  }
}

TEST(Threshold, GDecreasingInSignal) {
  double prev = 0.5 + 1e-12;
  for (double s = 0.0; s <= 5.0; s += 0.25) {
    const double g = threshold_g(NoiseModelV::make(NoiseKind::LogisticGY, 5.0, s));
    EXPECT_LT(g, prev) << s;
    prev = g;
  }
}

TEST(Threshold, GCurveDecreasingAndBelowHalf) {
  std::vector<double> ks;
  for (int i = 1; i <= 50; ++i) ks.push_back(0.02 * i);
  const auto curve = g_curve(kLogistic10, FeatureMap::polynomial(10.0, 5.0), ks);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    EXPECT_LE(curve[i].g, 0.5);
    if (i > 0) {
      EXPECT_LT(curve[i].g, curve[i - 1].g);
    }
  }
}

TEST(Threshold, StarInUnitHalf) {
  for (auto [model, map] : {std::pair{kLogistic10, FeatureMap::linear(10.0, 3.0)},
                            std::pair{kGm10, FeatureMap::polynomial(std::sqrt(10.0), 5.0)}}) {
    const auto ph = solve_kappa_star(model, map);
    EXPECT_GT(ph.kappa_star, 0.0);
    EXPECT_LE(ph.kappa_star, 0.5);
  }
}

TEST(Threshold, ObjectiveIsConvexInT) {
  const NoiseModelV v = NoiseModelV::make(NoiseKind::LogisticGY, 10.0, 3.0);
  const QuadratureRule vr = v_rule(v, QuadratureSpec{});
  for (double t = -3.0; t < 3.0; t += 0.25) {
    const double h = 1e-3;
    const double second = threshold_objective(vr, t + h) - 2 * threshold_objective(vr, t) +
                          threshold_objective(vr, t - h);
    EXPECT_GT(second, -1e-12) << t;
  }
}
