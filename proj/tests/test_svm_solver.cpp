#include <cmath>

#include <gtest/gtest.h>

#include "ddc/svm_solver.hpp"

using namespace ddc;

namespace {
const DataModelSpec kLogistic10{ModelKind::Logistic, 10.0, 0.5};
const FeatureMap kPoly2 = FeatureMap::polynomial(10.0, 2.0);
const DataModelSpec kGm10{ModelKind::GaussianMixture, std::sqrt(10.0), 0.5};
const FeatureMap kGmLinear = FeatureMap::linear(std::sqrt(10.0), 3.0);
}  // namespace

TEST(SvmSolver, LogisticMatchesIndependentSolver) {
  struct Ref { double kappa, q, rho, risk, cosine; };
  for (const Ref& ref : {Ref{0.8, 1.9563885590811174, 0.5461088428193315, 0.3525422921534662, 0.4540782634927824},
                         Ref{1.5, 1.0171183454562052, 0.5009314042872075, 0.35077747463585945, 0.45911121562533097}}) {
    const NoiseModelV v = noise_at(kLogistic10, kPoly2, ref.kappa);
    const SvmSolution sol = solve_svm(v, ref.kappa);
    EXPECT_NEAR(sol.q_star, ref.q, 1e-6);
    EXPECT_NEAR(sol.rho_star, ref.rho, 1e-6);
    const auto pr = svm_predictions(sol, kLogistic10, v, ref.kappa);
    EXPECT_NEAR(pr.risk, ref.risk, 1e-7);
    EXPECT_NEAR(pr.cosine, ref.cosine, 1e-7);
    EXPECT_LE(std::abs(sol.eta_at_solution), 1e-8);
  }
}

TEST(SvmSolver, GaussianMixtureRiskIsTail) {
  for (double k : {0.5, 1.0, 2.0}) {
    const NoiseModelV v = noise_at(kGm10, kGmLinear, k);
    const SvmSolution sol = solve_svm(v, k);
    const auto pr = svm_predictions(sol, kGm10, v, k);
    EXPECT_NEAR(pr.risk, normal_tail(sol.rho_star * v.s), 1e-8);
    EXPECT_NEAR(pr.cosine, sol.rho_star * v.s / kGm10.r, 1e-12);
  }
}

TEST(SvmSolver, ClosedFormAgreesWithQuadrature) {
  const NoiseModelV v = noise_at(kGm10, kGmLinear, 1.0);
  const EtaFunction closed(v, 1.0);
  const EtaFunction quad(v, 1.0, {}, true);
  for (double q : {0.3, 1.0, 4.0}) {
    for (double rho : {-0.5, 0.0, 0.4, 0.9}) EXPECT_NEAR(closed(q, rho), quad(q, rho), 1e-8);
  }
}

TEST(SvmSolver, EtaDecreasingInQ) {
  const EtaFunction eta_fn(noise_at(kLogistic10, kPoly2, 1.0), 1.0);
  for (int i = 0; i < 10; ++i) {
    const double rho = -0.9 + 0.2 * i;
    double prev = INFINITY;
    for (int j = 0; j < 20; ++j) {
      const double q = 0.1 * std::pow(1.4, j);
      const double val = eta_fn(q, rho);
      EXPECT_LT(val, prev) << rho << " " << q;
      prev = val;
    }
  }
}

TEST(SvmSolver, EtaBarDecreasing) {
  const EtaFunction eta_fn(noise_at(kGm10, kGmLinear, 1.5), 1.5);
  double prev = INFINITY;
  for (int j = 0; j < 50; ++j) {
    const double val = eta_fn.minimize_rho(0.05 * std::pow(1.15, j)).value;
    EXPECT_LT(val, prev);
    prev = val;
  }
}

TEST(SvmSolver, RhoGridRefinementStable) {
  const double k = 1.0;
  const NoiseModelV v = noise_at(kLogistic10, kPoly2, k);
  SvmOptions fine;
  fine.scan_points = 2000;
  EXPECT_NEAR(solve_svm(v, k).rho_star, solve_svm(v, k, fine).rho_star, 1e-4);
}

TEST(SvmSolver, MarginDecreasing) {
  const double ks = solve_kappa_star(kLogistic10, kPoly2).kappa_star;
  double prev = INFINITY;
  for (double k = ks + 0.05; k <= 3.0; k += 0.25) {
    const NoiseModelV v = noise_at(kLogistic10, kPoly2, k);
    const double m = svm_predictions(solve_svm(v, k), kLogistic10, v, k).normalized_margin;
    EXPECT_LT(m, prev) << k;
    prev = m;
  }
}

TEST(SvmSolver, QBlowsUpNearThreshold) {
  const double ks = solve_kappa_star(kGm10, kGmLinear).kappa_star;
  const double near = solve_svm(kGm10, kGmLinear, ks + 0.01, ks).q_star;
  const double far = solve_svm(kGm10, kGmLinear, ks + 0.1, ks).q_star;
  EXPECT_GT(near, far);
}

TEST(SvmSolver, RegimeGuard) {
  const double ks = solve_kappa_star(kGm10, kGmLinear).kappa_star;
  EXPECT_THROW(solve_svm(kGm10, kGmLinear, ks - 0.05, ks), NotInRegime);
  EXPECT_THROW(solve_svm(kGm10, kGmLinear, ks + 0.0005, ks), NotInRegime);
}

TEST(SvmPredictions, Examples) {
  const NoiseModelV gm = NoiseModelV::make(NoiseKind::GmShifted, 3.0, 2.0);
  SvmSolution sol;
  sol.q_star = 1.0;
  sol.rho_star = 0.6;
  EXPECT_NEAR(svm_predictions(sol, {ModelKind::GaussianMixture, 3.0, 0.5}, gm, 1.0).risk,
              0.11506967022170828, 1e-6);
  sol.rho_star = 1.0;
  EXPECT_NEAR(svm_predictions(sol, {ModelKind::GaussianMixture, 3.0, 0.5}, gm, 1.0).risk,
              normal_tail(2.0), 1e-12);
  sol.rho_star = 0.0;
  const NoiseModelV lg = NoiseModelV::make(NoiseKind::LogisticGY, 3.0, 2.0);
  const auto pr = svm_predictions(sol, {ModelKind::Logistic, 3.0, 0.5}, lg, 1.0);
  EXPECT_NEAR(pr.cosine, 0.0, 1e-15);
  EXPECT_NEAR(pr.risk, 0.5, 1e-12);
}
