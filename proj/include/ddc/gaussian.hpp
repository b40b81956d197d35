#pragma once

// Standard-normal primitives and a deterministic expectation engine for
// functionals of the independent pair (H, V), where H ~ N(0, 1) and V is the
// model-dependent "effective label-weighted feature":
//   logistic model:  V = G * Y,  Y ~ Rad(sigmoid(s G + sigma Z))
//   Gaussian mixture: V = G + s
// with G, Z iid N(0, 1).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ddc/error.hpp"

namespace ddc {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2 pi)

/// Standard normal density psi(t).
inline double normal_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

/// Standard normal tail Q(t) = P(N(0,1) > t), via erfc so the upper tail keeps full
/// relative precision.
inline double normal_tail(double t) { return 0.5 * std::erfc(t * std::numbers::sqrt2 / 2.0); }

/// Standard normal CDF Phi(t) = Q(-t).
inline double normal_cdf(double t) { return normal_tail(-t); }

/// E[(X)_-^2] for X ~ N(m, 1), where (x)_- = min(x, 0).
/// Closed form (1 + m^2) Q(m) - m psi(m).
inline double truncated_second_moment(double m) {
  return (1.0 + m * m) * normal_tail(m) - m * normal_pdf(m);
}

/// E[(c + b X)_-^2] for X ~ N(0, 1) and b >= 0; reduces to b^2 E[(X + c/b)_-^2].
inline double scaled_truncated_second_moment(double c, double b) {
  if (b == 0.0) return c < 0.0 ? c * c : 0.0;
  return b * b * truncated_second_moment(c / b);
}

// ---------------------------------------------------------------------------
// Quadrature rules
// ---------------------------------------------------------------------------

/// A rule approximating E[F(X)] for one scalar random variable by sum_i w_i F(x_i).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double v = f(nodes[i]);
      if (!std::isfinite(v)) {
        throw NonFiniteIntegrand("integrand not finite at node " + std::to_string(nodes[i]));
      }
      acc += weights[i] * v;
    }
    return acc;
  }

  void normalize() {
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
  }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_k.
inline QuadratureRule gauss_legendre(int k) {
  QuadratureRule rule;
  rule.nodes.resize(k);
  rule.weights.resize(k);
  for (int i = 0; i < (k + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = k * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= k; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = k * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[k - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[k - 1 - i] = w;
  }
  return rule;
}

inline const QuadratureRule& gauss_legendre_8() {
  static const QuadratureRule rule = gauss_legendre(8);
  return rule;
}

}  // namespace detail

/// Gauss-Hermite rule for E[F(X)], X ~ N(0, 1): physicists' nodes scaled by sqrt(2),
/// weights divided by sqrt(pi) and renormalized to sum to one.
inline QuadratureRule gauss_hermite_rule(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pim4 = 0.7511255444649425;  // pi^(-1/4)
  double z = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[n - 1];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[n - 2];
    } else {
      z = 2.0 * z - rule.nodes[n - i + 1];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    // nodes stored in physicists' scale here, rescaled below
    rule.nodes[n - 1 - i] = z;
    rule.nodes[i] = -z;
    rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] *= std::numbers::sqrt2;
    rule.weights[i] /= std::sqrt(std::numbers::pi);
  }
  rule.normalize();
  return rule;
}

/// Composite 8-point Gauss-Legendre rule for E[F(X)], X ~ N(0, 1), on [-half_width,
/// half_width]. The panel count is even so x = 0 is always a panel edge.
inline QuadratureRule composite_normal_rule(double panel_width, double half_width = 10.0) {
  const auto& gl = detail::gauss_legendre_8();
  const int half_panels = std::max(1, static_cast<int>(std::ceil(half_width / panel_width)));
  const double h = half_width / half_panels;
  QuadratureRule rule;
  rule.nodes.reserve(2 * half_panels * gl.size());
  rule.weights.reserve(2 * half_panels * gl.size());
  for (int p = -half_panels; p < half_panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t k = 0; k < gl.size(); ++k) {
      const double x = mid + 0.5 * h * gl.nodes[k];
      rule.nodes.push_back(x);
      rule.weights.push_back(0.5 * h * gl.weights[k] * normal_pdf(x));
    }
  }
  rule.normalize();
  return rule;
}

/// Composite Gauss-Legendre rule for plain integrals over [lo, hi] (no Gaussian weight).
inline QuadratureRule composite_interval_rule(double lo, double hi, double panel_width) {
  const auto& gl = detail::gauss_legendre_8();
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel_width)));
  const double h = (hi - lo) / panels;
  QuadratureRule rule;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    for (std::size_t k = 0; k < gl.size(); ++k) {
      rule.nodes.push_back(mid + 0.5 * h * gl.nodes[k]);
      rule.weights.push_back(0.5 * h * gl.weights[k]);
    }
  }
  return rule;
}

/// Quadrature resolution shared by every expectation in the library.
/// `nodes_per_dim` is the Gauss-Hermite order used for smooth integrands; the composite
/// rules used for kinked or steep integrands scale their panel width as 8 / nodes_per_dim,
/// so doubling `nodes_per_dim` refines every rule.
struct QuadratureSpec {
  int nodes_per_dim = 64;

  void validate() const {
    if (nodes_per_dim < 8) throw ConfigError("QuadratureSpec: nodes_per_dim must be >= 8");
  }
  double panel_width() const { return 8.0 / nodes_per_dim; }
  QuadratureRule hermite() const { return gauss_hermite_rule(nodes_per_dim); }
  QuadratureRule composite() const { return composite_normal_rule(panel_width()); }
};

// ---------------------------------------------------------------------------
// The random variable V
// ---------------------------------------------------------------------------

enum class NoiseKind { LogisticGY, GmShifted };

/// Parameters of V_{r,s}: signal strength s, total strength r, noise sigma = sqrt(r^2 - s^2).
struct NoiseModelV {
  NoiseKind model = NoiseKind::LogisticGY;
  double s = 0.0;
  double r = 1.0;
  double sigma = 1.0;

  static NoiseModelV make(NoiseKind model, double r, double s) {
    if (!(r > 0.0) || !(s >= 0.0) || s > r * (1.0 + 1e-15)) {
      throw OutOfDomain("NoiseModelV: need 0 <= s <= r and r > 0");
    }
    s = std::min(s, r);
    return {model, s, r, std::sqrt(std::max(0.0, r * r - s * s))};
  }
};

/// sigmoid without overflow for large |t|
inline double logistic_sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// P(Y = +1 | G = g) = E_Z[sigmoid(s g + sigma Z)].
///
/// For sigma <= 1 the integrand is smooth on the scale of Z and Gauss-Hermite is used.
/// Otherwise sigmoid(u) is split into the step 1{u > 0}, whose expectation is
/// Phi(a / sigma), and an exponentially decaying remainder integrated on the half line.
class LabelProbability {
 public:
  LabelProbability(double s, double sigma, const QuadratureSpec& quad)
      : s_(s), sigma_(sigma) {
    if (sigma_ <= 1.0) {
      rule_ = quad.hermite();
    } else {
      rule_ = composite_interval_rule(0.0, 40.0, std::min(1.0, 64.0 / quad.nodes_per_dim));
      for (std::size_t i = 0; i < rule_.size(); ++i) {
        rule_.weights[i] *= logistic_sigmoid(-rule_.nodes[i]);
      }
    }
  }

  double operator()(double g) const {
    const double a = s_ * g;
    if (sigma_ == 0.0) return logistic_sigmoid(a);
    if (sigma_ <= 1.0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rule_.size(); ++i) {
        acc += rule_.weights[i] * logistic_sigmoid(a + sigma_ * rule_.nodes[i]);
      }
      return acc;
    }
    double rem = 0.0;
    for (std::size_t i = 0; i < rule_.size(); ++i) {
      const double w = rule_.nodes[i];
      rem += rule_.weights[i] * (normal_pdf((-w - a) / sigma_) - normal_pdf((w - a) / sigma_));
    }
    return normal_cdf(a / sigma_) + rem / sigma_;
  }

 private:
  double s_;
  double sigma_;
  QuadratureRule rule_;
};

/// Which integrands a V rule must handle.
enum class Integrand {
  Generic,  ///< possibly kinked (e.g. (x)_-^2): composite Gauss-Legendre panels
  Smooth,   ///< analytic in v: Gauss-Hermite whenever the V density is itself smooth
};

/// Quadrature rule for the marginal law of V.
///
/// Logistic model: V = G Y has density 2 psi(v) p(v) with p the label probability above
/// (label mixing E[p f(G) + (1 - p) f(-G)] collapses to this via p(-g) = 1 - p(g)).
/// p varies on the scale sqrt(sigma^2 + 3) / s; composite panels are narrowed to resolve
/// it, and Gauss-Hermite is only used for smooth integrands when that scale is >= 1.
/// Gaussian mixture: V = G + s.
/// `max_width` caps the composite panel width for integrands with their own steep scale.
inline QuadratureRule v_rule(const NoiseModelV& noise, const QuadratureSpec& quad,
                             Integrand integrand = Integrand::Generic,
                             double max_width = INFINITY) {
  const bool smooth = integrand == Integrand::Smooth;
  const double base_width = std::min(quad.panel_width(), max_width);
  if (noise.model == NoiseKind::GmShifted) {
    QuadratureRule rule = smooth ? quad.hermite() : composite_normal_rule(base_width);
    for (double& x : rule.nodes) x += noise.s;
    return rule;
  }
  const double scale = noise.s > 0.0
                           ? std::sqrt(noise.sigma * noise.sigma + 3.0) / noise.s
                           : INFINITY;
  QuadratureRule rule;
  if (smooth && scale >= 1.0) {
    rule = quad.hermite();
  } else if (smooth) {
    const double width = std::max(0.5 * scale * 64.0 / quad.nodes_per_dim, 0.004);
    rule = composite_normal_rule(std::min(width, max_width));
  } else {
    const double width = std::max(std::min(base_width, 0.5 * scale), 0.004);
    rule = composite_normal_rule(width);
  }
  const LabelProbability p(noise.s, noise.sigma, quad);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    rule.weights[i] *= 2.0 * p(rule.nodes[i]);
  }
  rule.normalize();
  return rule;
}

/// E[F(V)] on the rule above.
template <class F>
double expect_V(F&& f, const NoiseModelV& noise, const QuadratureSpec& quad = {}) {
  return v_rule(noise, quad).expect(std::forward<F>(f));
}

/// E[f(H, V)] with H ~ N(0,1) independent of V, as a tensor product of the composite
/// rule in H and the V rule.
template <class F>
double expect_HV(F&& f, const NoiseModelV& noise, const QuadratureSpec& quad = {}) {
  const QuadratureRule h_rule = quad.composite();
  const QuadratureRule vr = v_rule(noise, quad);
  double acc = 0.0;
  for (std::size_t j = 0; j < vr.size(); ++j) {
    const double v = vr.nodes[j];
    double inner = 0.0;
    for (std::size_t i = 0; i < h_rule.size(); ++i) {
      const double val = f(h_rule.nodes[i], v);
      if (!std::isfinite(val)) {
        throw NonFiniteIntegrand("expect_HV: integrand not finite at (h, v) = (" +
                                 std::to_string(h_rule.nodes[i]) + ", " + std::to_string(v) +
                                 ")");
      }
      inner += h_rule.weights[i] * val;
    }
    acc += vr.weights[j] * inner;
  }
  return acc;
}

}  // namespace ddc
