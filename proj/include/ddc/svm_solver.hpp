#pragma once

// Asymptotics of the hard-margin SVM in the separable regime.
//
//   eta(q, rho) = E[(rho V + sqrt(1 - rho^2) H - 1/q)_-^2] - (1 - rho^2) kappa
//
// q* is the zero of eta_bar(q) = min_{|rho| <= 1} eta(q, rho) (strictly decreasing in q)
// and rho* the minimizing rho at q*.

#include <cmath>
#include <string>
#include <vector>

#include "ddc/error.hpp"
#include "ddc/gaussian.hpp"
#include "ddc/ml_solver.hpp"
#include "ddc/model.hpp"
#include "ddc/numeric.hpp"

namespace ddc {

/// Gaussian-mixture closed form: E[(G + rho s - 1/q)_-^2] - (1 - rho^2) kappa.
inline double eta_gm(double q, double rho, double s, double kappa) {
  return truncated_second_moment(rho * s - 1.0 / q) - (1.0 - rho * rho) * kappa;
}

/// eta on a fixed V rule; H is integrated in closed form.
inline double eta_quadrature(const QuadratureRule& v_nodes, double q, double rho, double kappa) {
  const double b = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const double c = 1.0 / q;
  const double e = v_nodes.expect(
      [=](double v) { return scaled_truncated_second_moment(rho * v - c, b); });
  return e - (1.0 - rho * rho) * kappa;
}

/// Evaluates eta for one (model, s, kappa); builds the V rule once.
class EtaFunction {
 public:
  EtaFunction(const NoiseModelV& noise, double kappa, const QuadratureSpec& quad = {},
              bool force_quadrature = false)
      : noise_(noise), kappa_(kappa) {
    if (noise.model == NoiseKind::LogisticGY || force_quadrature) {
      v_ = v_rule(noise, quad);
      quadrature_ = true;
    }
  }

  double operator()(double q, double rho) const {
    if (!(q > 0.0)) throw OutOfDomain("eta: q must be > 0");
    if (quadrature_) return eta_quadrature(v_, q, rho, kappa_);
    return eta_gm(q, rho, noise_.s, kappa_);
  }

  struct Min {
    double rho = 0.0;
    double value = 0.0;
  };

  /// min over rho in [-1, 1]: dense scan, then golden-section between the scan
  /// neighbours of the best grid point.
  Min minimize_rho(double q, int scan_points = 200) const {
    std::vector<double> grid(scan_points);
    int best = 0;
    double best_val = INFINITY;
    for (int i = 0; i < scan_points; ++i) {
      grid[i] = -1.0 + 2.0 * i / (scan_points - 1);
      const double v = (*this)(q, grid[i]);
      if (v < best_val) {
        best_val = v;
        best = i;
      }
    }
    const double lo = grid[std::max(best - 1, 0)];
    const double hi = grid[std::min(best + 1, scan_points - 1)];
    const auto refined =
        numeric::golden_section([&](double rho) { return (*this)(q, rho); }, lo, hi, 1e-11);
    if (refined.fx < best_val) return {refined.x, refined.fx};
    return {grid[best], best_val};
  }

  double kappa() const { return kappa_; }

 private:
  NoiseModelV noise_;
  double kappa_;
  QuadratureRule v_;
  bool quadrature_ = false;
};

inline double eta(double q, double rho, const NoiseModelV& noise, double kappa,
                  const QuadratureSpec& quad = {}) {
  return EtaFunction(noise, kappa, quad)(q, rho);
}

struct SvmSolution {
  double q_star = 0.0;
  double rho_star = 0.0;
  double eta_at_solution = 0.0;
  int iterations = 0;
};

struct SvmOptions {
  int scan_points = 200;
  double q_rel_tol = 1e-10;
  double q_max = 1e8;
  double margin = 1e-3;  ///< required gap kappa - kappa_star
  QuadratureSpec quad{};
};

/// Solves for (q*, rho*) at a given V law and kappa.
inline SvmSolution solve_svm(const NoiseModelV& noise, double kappa, const SvmOptions& opt = {}) {
  const EtaFunction eta_fn(noise, kappa, opt.quad);
  auto eta_bar = [&](double log_q) {
    return eta_fn.minimize_rho(std::exp(log_q), opt.scan_points).value;
  };
  // eta_bar -> +inf as q -> 0 and is strictly decreasing; walk outwards from q = 1
  double lo = 0.0, hi = 0.0;
  if (eta_bar(0.0) > 0.0) {
    lo = 0.0;
    hi = 1.0;
    while (eta_bar(hi) > 0.0) {
      lo = hi;
      hi += 1.0;
      if (std::exp(hi) > opt.q_max) {
        throw BracketFailure("solve_svm: eta_bar stays positive up to q=" +
                             std::to_string(opt.q_max) + " (kappa not above kappa*?)");
      }
    }
  } else {
    hi = 0.0;
    lo = -1.0;
    while (eta_bar(lo) <= 0.0) {
      hi = lo;
      lo -= 1.0;
      if (lo < -60.0) throw BracketFailure("solve_svm: eta_bar not positive for small q");
    }
  }
  const auto root = numeric::find_root(eta_bar, lo, hi, opt.q_rel_tol, 0.0, 500);
  SvmSolution sol;
  sol.q_star = std::exp(root.x);
  const auto m = eta_fn.minimize_rho(sol.q_star, opt.scan_points);
  sol.rho_star = m.rho;
  sol.eta_at_solution = m.value;
  sol.iterations = root.iterations;
  return sol;
}

inline SvmSolution solve_svm(const DataModelSpec& model, const FeatureMap& map, double kappa,
                             double kappa_star, const SvmOptions& opt = {}) {
  if (!(kappa > kappa_star + opt.margin)) {
    throw NotInRegime("solve_svm: kappa=" + std::to_string(kappa) +
                      " is not above kappa*=" + std::to_string(kappa_star) + " + margin");
  }
  return solve_svm(noise_at(model, map, kappa), kappa, opt);
}

inline SvmSolution solve_svm(const DataModelSpec& model, const FeatureMap& map, double kappa,
                             const SvmOptions& opt = {}) {
  return solve_svm(model, map, kappa, solve_kappa_star(model, map, opt.quad).kappa_star, opt);
}

inline Predictions svm_predictions(const SvmSolution& sol, const DataModelSpec& model,
                                   const NoiseModelV& noise, double kappa,
                                   const QuadratureSpec& quad = {}) {
  Predictions out;
  const double rho = sol.rho_star;
  out.cosine = rho * noise.s / model.r;
  out.risk = linear_rule_risk(rho, std::sqrt(std::max(0.0, 1.0 - rho * rho)), noise, quad);
  out.excess = out.risk - best_risk(model, quad);
  out.normalized_margin = std::sqrt(kappa) * sol.q_star;
  return out;
}

}  // namespace ddc
