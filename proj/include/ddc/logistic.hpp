#pragma once

// Scalar calculus of the logistic loss l(t) = log(1 + exp(-t)).

#include <cmath>
#include <string>

#include "ddc/error.hpp"
#include "ddc/gaussian.hpp"

namespace ddc::logistic {

inline double sigmoid(double t) { return logistic_sigmoid(t); }

inline double loss(double t) {
  if (t > 0.0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

/// l'(t) = -sigmoid(-t)
inline double loss_d1(double t) { return -sigmoid(-t); }

/// l''(t) = sigmoid(t) sigmoid(-t)
inline double loss_d2(double t) {
  const double a = std::abs(t);
  const double e = std::exp(-a);
  const double d = 1.0 + e;
  return e / (d * d);
}

struct ProxResult {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// prox_l(x; lambda) = argmin_v (x - v)^2 / (2 lambda) + l(v).
///
/// The minimizer solves v = x + lambda sigmoid(-v); the map v -> v - x - lambda sigmoid(-v)
/// is strictly increasing with its root in [x, x + lambda]. Newton steps that leave the
/// current bracket are replaced by bisection.
inline ProxResult prox(double x, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(x)) {
    throw OutOfDomain("prox: need lambda > 0 and finite x");
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  double lo = x, hi = x + lambda;
  // one Newton step from v = x as the starting point
  double v = x + lambda * sigmoid(-x) / (1.0 + lambda * loss_d2(x));
  v = std::min(std::max(v, lo), hi);
  double prev_abs_g = INFINITY;
  for (int it = 1; it <= 200; ++it) {
    const double sm = sigmoid(-v);
    const double g = v - x - lambda * sm;
    if (std::abs(g) <= tol) return {v, it, std::abs(g)};
    if (g > 0) {
      hi = v;
    } else {
      lo = v;
    }
    double next = v - g / (1.0 + lambda * sm * (1.0 - sm));
    // Newton can cycle across the inflection at v = 0 when lambda is large
    if (!(next > lo && next < hi) || std::abs(g) > 0.5 * prev_abs_g) next = 0.5 * (lo + hi);
    if (next == v) return {v, it, std::abs(g)};
    prev_abs_g = std::abs(g);
    v = next;
  }
  throw NoConvergence("prox: safeguarded Newton did not converge for x=" + std::to_string(x) +
                      ", lambda=" + std::to_string(lambda));
}

inline double prox_value(double x, double lambda) { return prox(x, lambda).value; }

/// Moreau envelope e_l(x; tau) = min_u (x - u)^2 / (2 tau) + l(u).
inline double moreau_env(double x, double tau) {
  const double u = prox(x, tau).value;
  return 0.5 * (x - u) * (x - u) / tau + loss(u);
}

}  // namespace ddc::logistic
