#include <cmath>

#include <gtest/gtest.h>

#include "ddc/model.hpp"

using namespace ddc;

TEST(FeatureMap, LinearSignal) {
  const FeatureMap m = FeatureMap::linear(std::sqrt(10.0), 3.0);
  const SignalStrength st = signal_strength(m, 1.5);
  EXPECT_NEAR(st.s * st.s, 5.0, 1e-12);
  EXPECT_NEAR(st.s * st.s + st.sigma * st.sigma, 10.0, 1e-12);
  EXPECT_NEAR(signal_strength(m, 3.0).sigma, 0.0, 1e-7);
  EXPECT_THROW(signal_strength(m, 3.5), OutOfDomain);
  EXPECT_THROW(signal_strength(m, 0.0), OutOfDomain);
}

TEST(FeatureMap, PolynomialSignal) {
  const FeatureMap m = FeatureMap::polynomial(10.0, 2.0);
  const SignalStrength st = signal_strength(m, 1.0);
  EXPECT_NEAR(st.s * st.s, 100.0 * 0.75, 1e-11);
  EXPECT_NEAR(st.s * st.s + st.sigma * st.sigma, 100.0, 1e-11);
  // small-kappa accuracy: s^2 ~ r^2 gamma kappa
  EXPECT_NEAR(signal_strength(m, 1e-10).s * signal_strength(m, 1e-10).s / 100.0, 2e-10, 1e-19);
  EXPECT_LT(signal_strength(m, 0.5).s, signal_strength(m, 0.6).s);
}

TEST(FeatureMap, Validation) {
  EXPECT_THROW(FeatureMap::linear(1.0, 0.5), ConfigError);
  EXPECT_THROW(FeatureMap::polynomial(1.0, 0.5), ConfigError);
  EXPECT_THROW(FeatureMap::constant(1.0, 2.0), ConfigError);
  EXPECT_THROW(FeatureMap::linear(-1.0, 2.0), ConfigError);
}

TEST(Model, Validation) {
  EXPECT_THROW((DataModelSpec{ModelKind::Logistic, 0.0, 0.5}.validate()), ConfigError);
  EXPECT_THROW((DataModelSpec{ModelKind::GaussianMixture, 1.0, 1.0}.validate()), ConfigError);
}

TEST(BestRisk, LogisticMatchesIndependentIntegration) {
  EXPECT_NEAR(best_risk({ModelKind::Logistic, 5.0, 0.5}), 0.10548014932262963, 1e-12);
  EXPECT_NEAR(best_risk({ModelKind::Logistic, 10.0, 0.5}), 0.05460797442505302, 1e-12);
  EXPECT_NEAR(best_risk({ModelKind::Logistic, 25.0, 0.5}), 0.022076256774050354, 1e-12);
}

TEST(BestRisk, GaussianMixtureIsTail) {
  EXPECT_NEAR(best_risk({ModelKind::GaussianMixture, 2.0, 0.5}), 0.02275013194817921, 1e-15);
}

TEST(BestRisk, DecreasesInR) {
  double prev = 1.0;
  for (double r : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
    const double b = best_risk({ModelKind::Logistic, r, 0.5});
    EXPECT_LT(b, prev);
    prev = b;
  }
}
