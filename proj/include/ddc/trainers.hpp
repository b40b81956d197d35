#pragma once

// Finite-size learners: gradient descent on the empirical logistic loss and the
// hard-margin SVM, plus exact risk/cosine of a weight vector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddc/datagen.hpp"
#include "ddc/error.hpp"
#include "ddc/logistic.hpp"
#include "ddc/ml_solver.hpp"
#include "ddc/model.hpp"

namespace ddc {

enum class TrainMethod { GdLogistic, HardMarginSvm };

enum class StopReason {
  GradientNorm,        ///< ||grad|| <= tol
  DirectionStable,     ///< normalized iterate stopped moving with zero training error
  ZeroTrainError,      ///< early exit requested once every point is classified
  IterationCap,
  KktSatisfied,
  Infeasible,          ///< no separating direction (SVM)
};

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::GradientNorm: return "gradient-norm";
    case StopReason::DirectionStable: return "direction-stable";
    case StopReason::ZeroTrainError: return "zero-train-error";
    case StopReason::IterationCap: return "iteration-cap";
    case StopReason::KktSatisfied: return "kkt";
    case StopReason::Infeasible: return "infeasible";
  }
  return "?";
}

struct TrainDiagnostics {
  long iterations = 0;
  double final_gradient_norm = NAN;  ///< GD
  double kkt_violation = NAN;        ///< SVM
  Eigen::VectorXd dual;              ///< SVM multipliers u (separable case)
  StopReason stop = StopReason::IterationCap;
};

struct TrainedClassifier {
  Eigen::VectorXd beta;
  TrainMethod method = TrainMethod::GdLogistic;
  double train_error = 0.0;
  bool separable = false;
  TrainDiagnostics diagnostics;
};

/// Fraction of samples with y_i w_i^T beta <= 0.
inline double train_error(const TrainSet& data, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd m = data.labels.cwiseProduct(data.features * beta);
  return static_cast<double>((m.array() <= 0.0).count()) / static_cast<double>(data.n());
}

/// Largest singular value of W by power iteration on W^T W.
inline double top_singular_value(const Eigen::MatrixXd& w, int steps = 30) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(w.cols()) / std::sqrt(static_cast<double>(w.cols()));
  double sv = 0.0;
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd u = w.transpose() * (w * v);
    const double nrm = u.norm();
    if (nrm == 0.0) return 0.0;
    sv = std::sqrt(nrm);
    v = u / nrm;
  }
  return sv;
}

struct GdConfig {
  long max_iterations = 200000;
  double gradient_tol = 1e-8;
  double direction_tol = 1e-9;
  int power_iterations = 30;
  bool stop_at_zero_train_error = false;
};

/// Fixed-step gradient descent on (1/n) sum l(y_i w_i^T beta) from beta = 0, step 1/L with
/// L = sigma_max(W)^2 / (4 n).
inline TrainedClassifier gd_logistic(const TrainSet& data, const GdConfig& cfg = {}) {
  const long n = data.n();
  const long p = data.p();
  // rows z_i = y_i w_i
  const Eigen::MatrixXd z = data.features.array().colwise() * data.labels.array();
  const double sv = top_singular_value(z, cfg.power_iterations);
  // power iteration underestimates sigma_max slightly; pad so the step stays below 1/L
  const double lip = 1.01 * sv * sv / (4.0 * static_cast<double>(n));
  const double step = 1.0 / lip;

  TrainedClassifier out;
  out.method = TrainMethod::GdLogistic;
  out.beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd margins = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd coef(n);
  Eigen::VectorXd prev_dir = Eigen::VectorXd::Zero(p);
  double gnorm = INFINITY;
  long it = 0;
  for (; it < cfg.max_iterations; ++it) {
    for (long i = 0; i < n; ++i) coef[i] = logistic::loss_d1(margins[i]);
    const Eigen::VectorXd grad = z.transpose() * coef / static_cast<double>(n);
    gnorm = grad.norm();
    const bool all_correct = (margins.array() > 0.0).all();
    if (gnorm <= cfg.gradient_tol) {
      out.diagnostics.stop = StopReason::GradientNorm;
      break;
    }
    if (all_correct && it > 0) {
      if (cfg.stop_at_zero_train_error) {
        out.diagnostics.stop = StopReason::ZeroTrainError;
        break;
      }
      const Eigen::VectorXd dir = out.beta / out.beta.norm();
      if ((dir - prev_dir).norm() <= cfg.direction_tol) {
        out.diagnostics.stop = StopReason::DirectionStable;
        break;
      }
      prev_dir = dir;
    } else if (it > 0) {
      prev_dir = out.beta / out.beta.norm();
    }
    out.beta -= step * grad;
    margins = z * out.beta;
  }
  if (it == cfg.max_iterations) out.diagnostics.stop = StopReason::IterationCap;
  out.diagnostics.iterations = it;
  out.diagnostics.final_gradient_norm = gnorm;
  out.train_error = train_error(data, out.beta);
  out.separable = out.train_error == 0.0;
  return out;
}

struct SvmTrainConfig {
  double kkt_tol = 1e-6;
  double norm_limit = 1e6;     ///< ||beta|| above this declares the data non-separable
  double dual_limit = 1e12;    ///< dual objective above this declares the data non-separable
  long max_mdm_iterations = 20000000;
  long max_epochs = 100000;
  std::uint64_t seed = 0;      ///< sweep order of coordinate ascent
};

/// Hard-margin SVM min ||beta|| s.t. y_i w_i^T beta >= 1.
///
/// Phase 1 finds the minimum-norm point x of conv{y_i w_i} by the
/// Mitchell-Dem'yanov-Malozemov method; the data are separable iff x != 0, and then
/// beta = x / ||x||^2 with dual u = weights / ||x||^2. Phase 2 polishes u by dual
/// coordinate ascent on sum u_i - ||sum u_i y_i w_i||^2 / 2 in seeded random order.
inline TrainedClassifier svm_train(const TrainSet& data, const SvmTrainConfig& cfg = {}) {
  const long n = data.n();
  const Eigen::MatrixXd z = data.features.array().colwise() * data.labels.array();
  const Eigen::MatrixXd gram = z * z.transpose();

  TrainedClassifier out;
  out.method = TrainMethod::HardMarginSvm;

  // phase 1: MDM on the simplex weights lam, tracking g = gram * lam
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(n);
  long start = 0;
  for (long i = 1; i < n; ++i) {
    if (gram(i, i) < gram(start, start)) start = i;
  }
  lam[start] = 1.0;
  Eigen::VectorXd g = gram.col(start);
  double xx = gram(start, start);  // ||x||^2
  const double min_sq = 1.0 / (cfg.norm_limit * cfg.norm_limit);
  long it = 0;
  bool separable = false;
  bool decided = false;
  for (; it < cfg.max_mdm_iterations; ++it) {
    long imin = 0;
    long jmax = -1;
    for (long i = 0; i < n; ++i) {
      if (g[i] < g[imin]) imin = i;
      if (lam[i] > 0.0 && (jmax < 0 || g[i] > g[jmax])) jmax = i;
    }
    if (xx <= min_sq) {
      decided = true;
      break;
    }
    // relative gap small enough for a dual start; phase 2 finishes the job
    if (g[imin] > 0.0 && g[jmax] - g[imin] <= 1e-9 * xx) {
      separable = true;
      decided = true;
      break;
    }
    if (imin == jmax) break;
    const double dd = gram(imin, imin) + gram(jmax, jmax) - 2.0 * gram(imin, jmax);
    if (!(dd > 0.0)) break;
    const double t = std::min(lam[jmax], (g[jmax] - g[imin]) / dd);
    lam[imin] += t;
    lam[jmax] -= t;
    if (lam[jmax] < 1e-300) lam[jmax] = 0.0;
    g += t * (gram.col(imin) - gram.col(jmax));
    xx = lam.dot(g);
  }
  if (!decided) {
    separable = g.minCoeff() > 0.0;
  }
  out.diagnostics.iterations = it;

  if (!separable) {
    out.beta = z.transpose() * lam;
    if (xx > 0.0) out.beta /= xx;
    out.separable = false;
    out.train_error = train_error(data, out.beta);
    out.diagnostics.stop = StopReason::Infeasible;
    out.diagnostics.kkt_violation = NAN;
    return out;
  }

  // phase 2: dual coordinate ascent from u = lam / ||x||^2
  Eigen::VectorXd u = lam / xx;
  Eigen::VectorXd beta = z.transpose() * u;
  Rng rng(cfg.seed);
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0L);
  double kkt = INFINITY;
  long epoch = 0;
  auto violation = [&]() {
    double worst = 0.0;
    const Eigen::VectorXd m = z * beta;
    for (long i = 0; i < n; ++i) {
      const double gi = m[i] - 1.0;
      const double v = u[i] > 0.0 ? std::abs(gi) : std::max(0.0, -gi);
      worst = std::max(worst, v);
    }
    return worst;
  };
  kkt = violation();
  for (; epoch < cfg.max_epochs && kkt > cfg.kkt_tol; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (long i : order) {
      const double gi = z.row(i).dot(beta) - 1.0;
      const double ui = std::max(0.0, u[i] - gi / gram(i, i));
      const double delta = ui - u[i];
      if (delta != 0.0) {
        beta += delta * z.row(i).transpose();
        u[i] = ui;
      }
    }
    const double dual = u.sum() - 0.5 * beta.squaredNorm();
    if (beta.norm() > cfg.norm_limit || dual > cfg.dual_limit) {
      out.beta = beta;
      out.separable = false;
      out.train_error = train_error(data, beta);
      out.diagnostics.iterations = it + epoch + 1;
      out.diagnostics.stop = StopReason::Infeasible;
      return out;
    }
    kkt = violation();
  }
  out.beta = beta;
  out.diagnostics.dual = u;
  out.separable = true;
  out.train_error = train_error(data, beta);
  out.diagnostics.iterations = it + epoch;
  out.diagnostics.kkt_violation = kkt;
  out.diagnostics.stop = kkt <= cfg.kkt_tol ? StopReason::KktSatisfied : StopReason::IterationCap;
  return out;
}

struct ExactMetrics {
  double risk = 0.0;
  double cosine = 0.0;
  double excess = 0.0;
};

/// Population risk and cosine similarity of sign(w^T beta) when beta0 lies on the first
/// axis with norm s.
inline ExactMetrics exact_metrics(const Eigen::VectorXd& beta, const DataModelSpec& model,
                                  const NoiseModelV& noise, const QuadratureSpec& quad = {}) {
  if (beta.size() == 0 || beta.norm() == 0.0) throw ZeroVector("exact_metrics: beta is zero");
  const double b1 = beta[0];
  const double a = beta.size() > 1 ? beta.tail(beta.size() - 1).norm() : 0.0;
  ExactMetrics m;
  m.risk = linear_rule_risk(b1, a, noise, quad);
  m.cosine = noise.s * b1 / (model.r * beta.norm());
  m.excess = m.risk - best_risk(model, quad);
  return m;
}

}  // namespace ddc
