#include <cmath>

#include <gtest/gtest.h>

#include "ddc/gaussian.hpp"

using namespace ddc;

TEST(NormalPrimitives, TailValues) {
  EXPECT_NEAR(normal_tail(1.0), 0.15865525393145705, 1e-15);
  EXPECT_NEAR(normal_tail(2.0), 0.02275013194817921, 1e-15);
  EXPECT_NEAR(normal_tail(0.0), 0.5, 1e-16);
  EXPECT_NEAR(normal_cdf(-1.2), 0.11506967022170828, 1e-15);
  EXPECT_GT(normal_tail(30.0), 0.0);
}

TEST(NormalPrimitives, TruncatedSecondMoment) {
  EXPECT_NEAR(truncated_second_moment(-1.5), 3.227152989375049, 1e-13);
  EXPECT_NEAR(truncated_second_moment(0.0), 0.5, 1e-15);
  EXPECT_NEAR(truncated_second_moment(0.7), 0.14194808845564594, 1e-14);
  EXPECT_NEAR(truncated_second_moment(2.5), 0.0011993223779556365, 1e-15);
}

TEST(NormalPrimitives, ScaledTruncatedSecondMoment) {
  EXPECT_DOUBLE_EQ(scaled_truncated_second_moment(-2.0, 0.0), 4.0);
  EXPECT_DOUBLE_EQ(scaled_truncated_second_moment(2.0, 0.0), 0.0);
  EXPECT_NEAR(scaled_truncated_second_moment(0.7 * 2.0, 2.0), 4.0 * 0.14194808845564594, 1e-13);
}

TEST(Quadrature, HermiteMoments) {
  const QuadratureRule gh = gauss_hermite_rule(64);
  EXPECT_NEAR(gh.expect([](double) { return 1.0; }), 1.0, 1e-14);
  EXPECT_NEAR(gh.expect([](double x) { return x * x; }), 1.0, 1e-12);
  EXPECT_NEAR(gh.expect([](double x) { return std::pow(x, 4); }), 3.0, 1e-11);
  EXPECT_NEAR(gh.expect([](double x) { return std::pow(x, 8); }), 105.0, 1e-9);
  EXPECT_NEAR(gh.expect([](double x) { return std::cos(x); }), std::exp(-0.5), 1e-14);
}

TEST(Quadrature, CompositeHandlesKinks) {
  const QuadratureRule rule = QuadratureSpec{}.composite();
  // kink on a panel edge is exact; inside a panel it costs a little accuracy
  for (double m : {-1.5, -0.3, 0.0, 0.7, 2.5}) {
    const double val = rule.expect([m](double x) {
      const double t = std::min(x + m, 0.0);
      return t * t;
    });
    const bool on_edge = std::fmod(std::abs(m), QuadratureSpec{}.panel_width()) == 0.0;
    EXPECT_NEAR(val, truncated_second_moment(m), on_edge ? 1e-13 : 1e-7) << m;
  }
  EXPECT_NEAR(rule.expect([](double x) { return x > 0.0 ? 1.0 : 0.0; }), 0.5, 1e-14);
}

TEST(Quadrature, NonFiniteIntegrandThrows) {
  const QuadratureRule gh = gauss_hermite_rule(16);
  EXPECT_THROW(gh.expect([](double) { return NAN; }), NonFiniteIntegrand);
}

TEST(Quadrature, SpecValidation) {
  EXPECT_THROW(QuadratureSpec{4}.validate(), ConfigError);
  EXPECT_NO_THROW(QuadratureSpec{8}.validate());
}

TEST(LabelProbability, MatchesIndependentIntegration) {
  const QuadratureSpec quad;
  EXPECT_NEAR(LabelProbability(2.0, 3.0, quad)(0.7), 0.6564616287218032, 1e-10);
  EXPECT_NEAR(LabelProbability(2.0, 0.5, quad)(0.7), 0.7908511260363518, 1e-10);
  EXPECT_NEAR(LabelProbability(5.0, 8.0, quad)(-1.3), 0.21400357820264737, 1e-10);
  EXPECT_NEAR(LabelProbability(1.0, 0.0, quad)(0.3), logistic_sigmoid(0.3), 1e-15);
}

TEST(LabelProbability, Symmetry) {
  const LabelProbability p(3.0, 4.0, QuadratureSpec{});
  for (double g : {0.1, 0.9, 2.3}) EXPECT_NEAR(p(g) + p(-g), 1.0, 1e-12);
}

TEST(NoiseModel, Construction) {
  const NoiseModelV v = NoiseModelV::make(NoiseKind::LogisticGY, 5.0, 3.0);
  EXPECT_NEAR(v.sigma, 4.0, 1e-15);
  EXPECT_NEAR(v.s * v.s + v.sigma * v.sigma, 25.0, 1e-12);
  EXPECT_THROW(NoiseModelV::make(NoiseKind::LogisticGY, 1.0, 2.0), OutOfDomain);
  EXPECT_THROW(NoiseModelV::make(NoiseKind::GmShifted, 0.0, 0.0), OutOfDomain);
}

TEST(VRule, GaussianMixtureMoments) {
  const NoiseModelV v = NoiseModelV::make(NoiseKind::GmShifted, 3.0, 1.5);
  for (auto integrand : {Integrand::Generic, Integrand::Smooth}) {
    const QuadratureRule rule = v_rule(v, QuadratureSpec{}, integrand);
    EXPECT_NEAR(rule.expect([](double x) { return x; }), 1.5, 1e-12);
    EXPECT_NEAR(rule.expect([](double x) { return x * x; }), 1.0 + 2.25, 1e-11);
  }
}

TEST(VRule, LogisticSecondMomentIsOne) {
  // V = G Y so V^2 = G^2
  for (auto [r, s] : {std::pair{10.0, 3.0}, std::pair{1.0, 0.5}, std::pair{25.0, 24.0}}) {
    const NoiseModelV v = NoiseModelV::make(NoiseKind::LogisticGY, r, s);
    for (auto integrand : {Integrand::Generic, Integrand::Smooth}) {
      const QuadratureRule rule = v_rule(v, QuadratureSpec{}, integrand);
      EXPECT_NEAR(rule.expect([](double x) { return x * x; }), 1.0, 1e-10);
    }
  }
}

TEST(VRule, LogisticMeanAgreesAcrossRules) {
  const NoiseModelV v = NoiseModelV::make(NoiseKind::LogisticGY, 10.0, 3.0);
  const double a = v_rule(v, QuadratureSpec{}, Integrand::Generic).expect([](double x) { return x; });
  const double b = v_rule(v, QuadratureSpec{}, Integrand::Smooth).expect([](double x) { return x; });
  const double c = v_rule(v, QuadratureSpec{128}, Integrand::Generic).expect([](double x) { return x; });
  EXPECT_NEAR(a, b, 1e-9);
  EXPECT_NEAR(a, c, 1e-9);
  EXPECT_GT(a, 0.0);
}

TEST(VRule, ZeroSignalIsSymmetric) {
  const NoiseModelV v = NoiseModelV::make(NoiseKind::LogisticGY, 2.0, 0.0);
  const QuadratureRule rule = v_rule(v, QuadratureSpec{});
  EXPECT_NEAR(rule.expect([](double x) { return x; }), 0.0, 1e-14);
}

TEST(ExpectHV, MatchesClosedForm) {
  const NoiseModelV v = NoiseModelV::make(NoiseKind::GmShifted, 2.0, 1.0);
  const double t = 0.8;
  const double val = expect_HV(
      [t](double h, double x) {
        const double m = std::min(h + t * x, 0.0);
        return m * m;
      },
      v);
  const double b = std::sqrt(1.0 + t * t);
  EXPECT_NEAR(val, b * b * truncated_second_moment(t * 1.0 / b), 1e-7);
}
