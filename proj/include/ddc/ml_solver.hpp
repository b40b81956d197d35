#pragma once

// Asymptotics of the logistic maximum-likelihood estimator in the non-separable regime.
//
// Unknowns (mu, alpha, lambda) solve
//   0              = E[V l'(prox(alpha H + mu V; lambda))]
//   alpha^2 kappa  = lambda^2 E[l'(prox(...))^2]
//   kappa          = lambda E[l''(prox(...)) / (1 + lambda l''(prox(...)))]
// For the Gaussian mixture, alpha H + mu V ~ N(mu s, alpha^2 + mu^2) and Stein's lemma
// turns the first equation into mu kappa = -s lambda E[l'(prox(G_{mu,alpha}))].

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "ddc/error.hpp"
#include "ddc/gaussian.hpp"
#include "ddc/logistic.hpp"
#include "ddc/model.hpp"
#include "ddc/numeric.hpp"
#include "ddc/phase_transition.hpp"

namespace ddc {

/// Expectations of the prox-derived quantities at one (mu, alpha, lambda).
struct ProxMoments {
  double v_d1 = 0.0;    ///< E[V l'(p)]
  double d1 = 0.0;      ///< E[l'(p)]
  double d1_sq = 0.0;   ///< E[l'(p)^2]
  double d2_frac = 0.0; ///< E[l''(p) / (1 + lambda l''(p))]
};

namespace detail {

struct ProxTerms {
  double d1, d1_sq, d2_frac;
};

inline ProxTerms prox_terms(double x, double lambda) {
  const double p = logistic::prox_value(x, lambda);
  const double d1 = logistic::loss_d1(p);
  const double d2 = logistic::loss_d2(p);
  return {d1, d1 * d1, d2 / (1.0 + lambda * d2)};
}

}  // namespace detail

/// Moments over the pair (H, V): tensor product of Gauss-Hermite in H and the V rule.
class TwoDimMoments {
 public:
  TwoDimMoments(const NoiseModelV& noise, const QuadratureSpec& quad)
      : h_(quad.hermite()), v_(v_rule(noise, quad, Integrand::Smooth)) {}

  ProxMoments operator()(double mu, double alpha, double lambda) const {
    ProxMoments m;
    for (std::size_t j = 0; j < v_.size(); ++j) {
      const double v = v_.nodes[j];
      double d1 = 0.0, d1_sq = 0.0, frac = 0.0;
      for (std::size_t i = 0; i < h_.size(); ++i) {
        const auto t = detail::prox_terms(alpha * h_.nodes[i] + mu * v, lambda);
        d1 += h_.weights[i] * t.d1;
        d1_sq += h_.weights[i] * t.d1_sq;
        frac += h_.weights[i] * t.d2_frac;
      }
      const double w = v_.weights[j];
      m.v_d1 += w * v * d1;
      m.d1 += w * d1;
      m.d1_sq += w * d1_sq;
      m.d2_frac += w * frac;
    }
    return m;
  }

 private:
  QuadratureRule h_;
  QuadratureRule v_;
};

/// Moments for the Gaussian mixture over the single variable G_{mu,alpha}.
class GmMoments {
 public:
  GmMoments(double s, const QuadratureSpec& quad) : s_(s), z_(quad.hermite()) {}

  ProxMoments operator()(double mu, double alpha, double lambda) const {
    const double mean = mu * s_;
    const double sd = std::sqrt(alpha * alpha + mu * mu);
    ProxMoments m;
    for (std::size_t i = 0; i < z_.size(); ++i) {
      const auto t = detail::prox_terms(mean + sd * z_.nodes[i], lambda);
      m.d1 += z_.weights[i] * t.d1;
      m.d1_sq += z_.weights[i] * t.d1_sq;
      m.d2_frac += z_.weights[i] * t.d2_frac;
    }
    // Stein: E[V l'(p)] = s E[l'] + mu E[l'' prox'] with prox' = 1 / (1 + lambda l'')
    m.v_d1 = s_ * m.d1 + mu * m.d2_frac;
    return m;
  }

 private:
  double s_;
  QuadratureRule z_;
};

using MlResiduals = std::array<double, 3>;

inline MlResiduals ml_residuals_from(const ProxMoments& m, double alpha, double lambda,
                                     double kappa) {
  return {m.v_d1, lambda * lambda * m.d1_sq - alpha * alpha * kappa,
          lambda * m.d2_frac - kappa};
}

/// Residuals (LHS - RHS) of the three ML equations in their generic form.
/// The Gaussian mixture is evaluated on its one-dimensional reduction unless
/// `force_two_dim` is set, in which case the generic (H, V) quadrature is used.
inline MlResiduals ml_residuals(double mu, double alpha, double lambda, double kappa,
                                const NoiseModelV& noise, const QuadratureSpec& quad = {},
                                bool force_two_dim = false) {
  if (!(alpha > 0.0) || !(lambda > 0.0)) throw OutOfDomain("ml_residuals: alpha, lambda > 0");
  if (noise.model == NoiseKind::GmShifted && !force_two_dim) {
    return ml_residuals_from(GmMoments(noise.s, quad)(mu, alpha, lambda), alpha, lambda, kappa);
  }
  return ml_residuals_from(TwoDimMoments(noise, quad)(mu, alpha, lambda), alpha, lambda, kappa);
}

/// Residuals of the Gaussian-mixture reformulation:
///   mu kappa + s E[lambda l'],  E[(lambda l')^2] - alpha^2 kappa,  E[lambda l''/(1+lambda l'')] - kappa.
inline MlResiduals ml_gm_residuals(double mu, double alpha, double lambda, double kappa,
                                   double s, const QuadratureSpec& quad = {}) {
  const ProxMoments m = GmMoments(s, quad)(mu, alpha, lambda);
  return {mu * kappa + s * lambda * m.d1, lambda * lambda * m.d1_sq - alpha * alpha * kappa,
          lambda * m.d2_frac - kappa};
}

struct MlSolution {
  double mu = 1.0;
  double alpha = 1.0;
  double lambda = 1.0;
  MlResiduals residuals{0.0, 0.0, 0.0};
  int iterations = 0;
  bool converged = false;

  double max_residual() const {
    return std::max({std::abs(residuals[0]), std::abs(residuals[1]), std::abs(residuals[2])});
  }
};

struct MlOptions {
  double mu0 = 1.0;
  double alpha0 = 1.0;
  double lambda0 = 1.0;
  double damping = 0.5;
  double step_tol = 1e-9;
  double residual_tol = 1e-6;
  int max_iterations = 10000;
  int newton_after = 30;  ///< Gauss-Seidel sweeps before each Newton polishing attempt (0 disables)
  double margin = 1e-3;  ///< required gap kappa_star - kappa
  QuadratureSpec quad{};
};

/// Raised when the outer iteration hits its cap; carries the last iterate.
class MlNoConvergence : public NoConvergence {
 public:
  MlNoConvergence(const std::string& what, MlSolution last)
      : NoConvergence(what), last_(last) {}
  const MlSolution& last() const { return last_; }

 private:
  MlSolution last_;
};

namespace detail {

/// Generic-form moments for either model, dispatched once per solve.
class MlMoments {
 public:
  MlMoments(const NoiseModelV& noise, const QuadratureSpec& quad) : noise_(noise) {
    if (noise.model == NoiseKind::GmShifted) {
      gm_.emplace(noise.s, quad);
    } else {
      two_.emplace(noise, quad);
    }
  }
  ProxMoments operator()(double mu, double alpha, double lambda) const {
    return gm_ ? (*gm_)(mu, alpha, lambda) : (*two_)(mu, alpha, lambda);
  }
  bool is_gm() const { return gm_.has_value(); }
  double s() const { return noise_.s; }

 private:
  NoiseModelV noise_;
  std::optional<GmMoments> gm_;
  std::optional<TwoDimMoments> two_;
};

/// Per-sweep accuracy controls: inner root tolerance and initial bracket half-widths.
/// Both shrink with the size of the previous outer step, so early sweeps are cheap and
/// the final sweeps are exact to ~1e-13.
struct SweepControl {
  double root_tol = 1e-6;
  double lambda_halfwidth = 0.5;  ///< in log(lambda)
  double mu_halfwidth = 0.25;
};

/// One Gauss-Seidel sweep: lambda from the third equation, mu from the first, alpha
/// from the second. Returns the undamped update.
inline std::array<double, 3> gauss_seidel_sweep(const MlMoments& moments, double mu,
                                                double alpha, double lambda, double kappa,
                                                const SweepControl& ctl = {1e-13, 0.5, 0.25}) {
  // lambda: increasing root of lambda E[l''/(1 + lambda l'')] - kappa, solved in log lambda
  auto f_lambda = [&](double log_lam) {
    const double lam = std::exp(log_lam);
    return lam * moments(mu, alpha, lam).d2_frac - kappa;
  };
  const double l0 = std::log(lambda);
  auto [llo, lhi] = numeric::expand_bracket(f_lambda, l0 - ctl.lambda_halfwidth,
                                            l0 + ctl.lambda_halfwidth, true, 60.0);
  const double lam_new = std::exp(numeric::find_root(f_lambda, llo, lhi, ctl.root_tol).x);

  // mu: increasing root of the first equation (GM uses its reformulated version)
  const double s = moments.s();
  auto f_mu = [&](double m) {
    const ProxMoments pm = moments(m, alpha, lam_new);
    return moments.is_gm() ? m * kappa + s * lam_new * pm.d1 : pm.v_d1;
  };
  auto [mlo, mhi] =
      numeric::expand_bracket(f_mu, mu - ctl.mu_halfwidth, mu + ctl.mu_halfwidth, true, 1e8);
  const double mu_new = numeric::find_root(f_mu, mlo, mhi, ctl.root_tol).x;

  // alpha: explicit from the second equation
  const ProxMoments pm = moments(mu_new, alpha, lam_new);
  const double alpha_new = lam_new * std::sqrt(pm.d1_sq / kappa);
  return {mu_new, alpha_new, lam_new};
}

/// Newton iteration on the scaled residuals in (mu, log alpha, log lambda) with a
/// forward-difference Jacobian and backtracking. Returns false if it stalls.
inline bool newton_polish(const MlMoments& moments, double kappa, double& mu, double& alpha,
                          double& lambda, int max_steps = 40) {
  using Vec = Eigen::Vector3d;
  auto scaled = [&](const Vec& x) {
    const double a = std::exp(x[1]), l = std::exp(x[2]);
    const ProxMoments m = moments(x[0], a, l);
    return Vec(m.v_d1, l * l * m.d1_sq / (a * a * kappa) - 1.0, l * m.d2_frac / kappa - 1.0);
  };
  Vec x(mu, std::log(alpha), std::log(lambda));
  Vec f = scaled(x);
  for (int step = 0; step < max_steps; ++step) {
    if (f.lpNorm<Eigen::Infinity>() <= 1e-13) break;
    Eigen::Matrix3d jac;
    for (int j = 0; j < 3; ++j) {
      Vec xh = x;
      const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      xh[j] += h;
      jac.col(j) = (scaled(xh) - f) / h;
    }
    const Vec dx = jac.fullPivLu().solve(-f);
    if (!dx.allFinite()) return false;
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const Vec xn = x + t * dx;
      Vec fn;
      try {
        fn = scaled(xn);
      } catch (const Error&) {
        continue;
      }
      if (fn.allFinite() && fn.norm() < (1.0 - 1e-4 * t) * f.norm()) {
        x = xn;
        f = fn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if ((t * dx).lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) break;
  }
  if (!(f.lpNorm<Eigen::Infinity>() <= 1e-9)) return false;
  mu = x[0];
  alpha = std::exp(x[1]);
  lambda = std::exp(x[2]);
  return true;
}

}  // namespace detail

/// Solves the ML system at a given V law by damped Gauss-Seidel.
/// Throws MlNoConvergence (with the last iterate) if the cap is reached.
inline MlSolution solve_ml(const NoiseModelV& noise, double kappa, const MlOptions& opt = {}) {
  const detail::MlMoments moments(noise, opt.quad);
  double mu = opt.mu0, alpha = opt.alpha0, lambda = opt.lambda0;
  const double theta = opt.damping;
  detail::SweepControl ctl;
  MlSolution sol;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const auto next = detail::gauss_seidel_sweep(moments, mu, alpha, lambda, kappa, ctl);
    const double nmu = (1.0 - theta) * mu + theta * next[0];
    const double nalpha = (1.0 - theta) * alpha + theta * next[1];
    const double nlambda = (1.0 - theta) * lambda + theta * next[2];
    const double change = std::max(
        {std::abs(nmu - mu), std::abs(nalpha - alpha), std::abs(nlambda - lambda)});
    ctl.root_tol = std::clamp(0.01 * change, 1e-14, 1e-6);
    ctl.lambda_halfwidth = std::clamp(4.0 * std::abs(next[2] - lambda) / lambda, 1e-9, 0.5);
    ctl.mu_halfwidth = std::clamp(4.0 * std::abs(next[0] - mu), 1e-9, 0.25);
    mu = nmu;
    alpha = nalpha;
    lambda = nlambda;
    sol.iterations = it;
    if (opt.newton_after > 0 && it % opt.newton_after == 0 && change > opt.step_tol) {
      double m = mu, a = alpha, l = lambda;
      if (detail::newton_polish(moments, kappa, m, a, l)) {
        mu = m;
        alpha = a;
        lambda = l;
        ctl = {1e-14, 1e-6, 1e-6};
        continue;
      }
    }
    if (change <= opt.step_tol) {
      sol.mu = mu;
      sol.alpha = alpha;
      sol.lambda = lambda;
      sol.residuals = ml_residuals_from(moments(mu, alpha, lambda), alpha, lambda, kappa);
      if (sol.max_residual() <= opt.residual_tol) {
        sol.converged = true;
        return sol;
      }
    }
  }
  sol.mu = mu;
  sol.alpha = alpha;
  sol.lambda = lambda;
  sol.residuals = ml_residuals_from(moments(mu, alpha, lambda), alpha, lambda, kappa);
  throw MlNoConvergence("solve_ml: no convergence after " + std::to_string(opt.max_iterations) +
                            " iterations at kappa=" + std::to_string(kappa),
                        sol);
}

/// Solves at kappa for the given model and feature map, checking the regime against a
/// known threshold.
inline MlSolution solve_ml(const DataModelSpec& model, const FeatureMap& map, double kappa,
                           double kappa_star, const MlOptions& opt = {}) {
  if (!(kappa < kappa_star - opt.margin)) {
    throw NotInRegime("solve_ml: kappa=" + std::to_string(kappa) +
                      " is not below kappa*=" + std::to_string(kappa_star) + " - margin");
  }
  return solve_ml(noise_at(model, map, kappa), kappa, opt);
}

inline MlSolution solve_ml(const DataModelSpec& model, const FeatureMap& map, double kappa,
                           const MlOptions& opt = {}) {
  return solve_ml(model, map, kappa, solve_kappa_star(model, map, opt.quad).kappa_star, opt);
}

struct Predictions {
  double risk = 0.0;
  double cosine = 0.0;
  double excess = 0.0;
  double normalized_margin = NAN;  ///< only meaningful in the separable regime
};

/// P(mu V + alpha H < 0) = E[Q(mu V / alpha)] on the V quadrature rule, for either model.
inline double linear_rule_risk_quadrature(double mu, double alpha, const NoiseModelV& noise,
                                          const QuadratureSpec& quad = {}) {
  if (mu == 0.0 && alpha == 0.0) throw ZeroVector("linear_rule_risk: zero direction");
  if (alpha == 0.0) {
    if (noise.model == NoiseKind::GmShifted) return normal_tail(mu > 0.0 ? noise.s : -noise.s);
    // P(mu V < 0): indicator integrated on a rule with a panel edge at v = 0
    QuadratureRule vr = v_rule(noise, quad);
    double neg = 0.0;
    for (std::size_t i = 0; i < vr.size(); ++i) {
      if (mu * vr.nodes[i] < 0.0) neg += vr.weights[i];
    }
    return neg;
  }
  const double c = mu / alpha;
  const QuadratureRule vr = std::abs(c) <= 1.0
                                ? v_rule(noise, quad, Integrand::Smooth)
                                : v_rule(noise, quad, Integrand::Generic, 0.5 / std::abs(c));
  return vr.expect([c](double v) { return normal_tail(c * v); });
}

/// Risk of a direction with signal component mu and orthogonal norm alpha; closed form
/// Q(mu s / sqrt(mu^2 + alpha^2)) for the Gaussian mixture.
inline double linear_rule_risk(double mu, double alpha, const NoiseModelV& noise,
                               const QuadratureSpec& quad = {}) {
  const double norm = std::hypot(mu, alpha);
  if (norm == 0.0) throw ZeroVector("linear_rule_risk: zero direction");
  if (noise.model == NoiseKind::GmShifted) return normal_tail(mu * noise.s / norm);
  return linear_rule_risk_quadrature(mu, alpha, noise, quad);
}

inline Predictions ml_predictions(const MlSolution& sol, const DataModelSpec& model,
                                  const NoiseModelV& noise, const QuadratureSpec& quad = {}) {
  Predictions out;
  const double norm = std::hypot(sol.mu, sol.alpha);
  out.cosine = noise.s * sol.mu / (model.r * norm);
  out.risk = linear_rule_risk(sol.mu, sol.alpha, noise, quad);
  out.excess = out.risk - best_risk(model, quad);
  return out;
}

}  // namespace ddc
