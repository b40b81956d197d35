#pragma once

// Separability threshold: g(kappa) = min_t E[(H + t V)_-^2] and its fixed point kappa*.

#include <cmath>
#include <utility>
#include <vector>

#include "ddc/error.hpp"
#include "ddc/gaussian.hpp"
#include "ddc/model.hpp"
#include "ddc/numeric.hpp"

namespace ddc {

/// Closed form of E[(H + t V)_-^2] when V = G + s:
/// (1 + t^2 + t^2 s^2) Q(m) - t s sqrt(1 + t^2) psi(m),  m = t s / sqrt(1 + t^2).
inline double threshold_objective_gm(double s, double t) {
  const double b = std::sqrt(1.0 + t * t);
  return b * b * truncated_second_moment(t * s / b);
}

/// E[(H + t V)_-^2] by integrating H in closed form and V on its quadrature rule.
inline double threshold_objective(const QuadratureRule& v_nodes, double t) {
  return v_nodes.expect([t](double v) { return truncated_second_moment(t * v); });
}

/// g for a fixed V law via the quadrature path (used for both models).
inline double threshold_g_quadrature(const NoiseModelV& noise, const QuadratureSpec& quad = {}) {
  const QuadratureRule vr = v_rule(noise, quad);
  return numeric::minimize_convex([&](double t) { return threshold_objective(vr, t); }).fx;
}

/// g for a fixed V law; Gaussian mixtures use the closed form.
inline double threshold_g(const NoiseModelV& noise, const QuadratureSpec& quad = {}) {
  if (noise.model == NoiseKind::GmShifted) {
    const double s = noise.s;
    return numeric::minimize_convex([s](double t) { return threshold_objective_gm(s, t); }).fx;
  }
  return threshold_g_quadrature(noise, quad);
}

inline double threshold_g(const DataModelSpec& model, const FeatureMap& map, double kappa,
                          const QuadratureSpec& quad = {}) {
  return threshold_g(noise_at(model, map, kappa), quad);
}

struct PhaseResult {
  double kappa_star = 0.0;
  double g_at_star = 0.0;
  std::pair<double, double> bracket{0.0, 0.0};
  int iterations = 0;
};

inline constexpr double kKappaStarLo = 1e-4;
inline constexpr double kKappaStarHi = 0.5;

/// Root of g(kappa) = kappa on [1e-4, 0.5]. g is strictly decreasing, so the root is unique.
inline PhaseResult solve_kappa_star(const DataModelSpec& model, const FeatureMap& map,
                                    const QuadratureSpec& quad = {}) {
  model.validate();
  map.validate();
  const double lo = kKappaStarLo;
  const double hi = std::min(kKappaStarHi, map.kappa_max());
  auto excess = [&](double kappa) { return threshold_g(model, map, kappa, quad) - kappa; };
  const double h_lo = excess(lo);
  const double h_hi = excess(hi);
  constexpr double kTol = 1e-10;
  if (std::abs(h_hi) <= kTol) return {hi, h_hi + hi, {lo, hi}, 0};
  if (std::abs(h_lo) <= kTol) return {lo, h_lo + lo, {lo, hi}, 0};
  if (h_lo < 0.0 || h_hi > 0.0) {
    throw NoRoot("solve_kappa_star: g(kappa) - kappa has no sign change on [" +
                 std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const numeric::RootResult root = numeric::find_root(excess, lo, hi, 1e-13, kTol);
  return {root.x, root.fx + root.x, {lo, hi}, root.iterations};
}

struct GPoint {
  double kappa = 0.0;
  double g = 0.0;
};

inline std::vector<GPoint> g_curve(const DataModelSpec& model, const FeatureMap& map,
                                   const std::vector<double>& kappas,
                                   const QuadratureSpec& quad = {}) {
  std::vector<GPoint> out;
  out.reserve(kappas.size());
  for (double k : kappas) out.push_back({k, threshold_g(model, map, k, quad)});
  return out;
}

}  // namespace ddc
