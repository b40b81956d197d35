#pragma once

// Data-generating models and feature-selection maps kappa -> s(kappa).

#include <cmath>
#include <string>

#include "ddc/error.hpp"
#include "ddc/gaussian.hpp"

namespace ddc {

enum class ModelKind { Logistic, GaussianMixture };

/// Generative model plus total signal strength r = ||eta0|| and the GM class prior.
struct DataModelSpec {
  ModelKind kind = ModelKind::Logistic;
  double r = 1.0;
  double prior_plus = 0.5;

  void validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("DataModelSpec: r must be > 0");
    if (!(prior_plus > 0.0 && prior_plus < 1.0)) {
      throw ConfigError("DataModelSpec: prior_plus must lie in (0, 1)");
    }
  }
  NoiseKind noise_kind() const {
    return kind == ModelKind::Logistic ? NoiseKind::LogisticGY : NoiseKind::GmShifted;
  }
};

enum class MapKind {
  Linear,      ///< s^2 = r^2 kappa / zeta on (0, zeta]
  Polynomial,  ///< s^2 = r^2 (1 - (1 + kappa)^-gamma) on (0, inf)
  Constant,    ///< s fixed for every kappa; degenerate, used for diagnostics
};

struct FeatureMap {
  MapKind kind = MapKind::Linear;
  double r = 1.0;
  double zeta = 1.0;
  double gamma = 1.0;
  double constant_s = 0.0;

  static FeatureMap linear(double r, double zeta) {
    FeatureMap m{MapKind::Linear, r, zeta, 1.0, 0.0};
    m.validate();
    return m;
  }
  static FeatureMap polynomial(double r, double gamma) {
    FeatureMap m{MapKind::Polynomial, r, 1.0, gamma, 0.0};
    m.validate();
    return m;
  }
  static FeatureMap constant(double r, double s) {
    FeatureMap m{MapKind::Constant, r, 1.0, 1.0, s};
    m.validate();
    return m;
  }

  void validate() const {
    if (!(r > 0.0)) throw ConfigError("FeatureMap: r must be > 0");
    switch (kind) {
      case MapKind::Linear:
        if (!(zeta >= 1.0)) throw ConfigError("FeatureMap: zeta must be >= 1");
        break;
      case MapKind::Polynomial:
        if (!(gamma >= 1.0)) throw ConfigError("FeatureMap: gamma must be >= 1");
        break;
      case MapKind::Constant:
        if (!(constant_s >= 0.0 && constant_s <= r)) {
          throw ConfigError("FeatureMap: constant s must lie in [0, r]");
        }
        break;
    }
  }

  bool in_domain(double kappa) const {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) return false;
    return kind != MapKind::Linear || kappa <= zeta;
  }

  /// Largest admissible kappa (infinity when unbounded).
  double kappa_max() const { return kind == MapKind::Linear ? zeta : INFINITY; }
};

struct SignalStrength {
  double s = 0.0;
  double sigma = 0.0;
};

/// s(kappa) and sigma(kappa) = sqrt(r^2 - s^2).
inline SignalStrength signal_strength(const FeatureMap& map, double kappa) {
  if (!map.in_domain(kappa)) {
    throw OutOfDomain("signal_strength: kappa=" + std::to_string(kappa) + " outside map domain");
  }
  const double r2 = map.r * map.r;
  double frac = 0.0;  // s^2 / r^2
  switch (map.kind) {
    case MapKind::Linear:
      frac = kappa / map.zeta;
      break;
    case MapKind::Polynomial:
      frac = -std::expm1(-map.gamma * std::log1p(kappa));
      break;
    case MapKind::Constant:
      frac = (map.constant_s * map.constant_s) / r2;
      break;
  }
  frac = std::min(std::max(frac, 0.0), 1.0);
  return {map.r * std::sqrt(frac), map.r * std::sqrt(1.0 - frac)};
}

inline NoiseModelV noise_at(const DataModelSpec& model, const FeatureMap& map, double kappa) {
  const SignalStrength st = signal_strength(map, kappa);
  NoiseModelV noise = NoiseModelV::make(model.noise_kind(), model.r, std::min(st.s, model.r));
  noise.sigma = st.sigma;
  return noise;
}

/// Risk of sign(x^T eta0) on fresh data.
/// Logistic: E[sigmoid(-r |G|)] = 2 E[sigmoid(-r G) 1{G > 0}]. Gaussian mixture: Q(r).
inline double best_risk(const DataModelSpec& model, const QuadratureSpec& quad = {}) {
  if (!(model.r > 0.0)) throw ConfigError("best_risk: r must be > 0");
  if (model.kind == ModelKind::GaussianMixture) return normal_tail(model.r);
  // panels resolve the sigmoid's 1/r scale; 0 is a panel edge of the half-line grid
  const double width = std::min(quad.panel_width(), 0.5 / model.r);
  const QuadratureRule half = composite_interval_rule(0.0, 10.0, width);
  double acc = 0.0;
  for (std::size_t i = 0; i < half.size(); ++i) {
    const double g = half.nodes[i];
    acc += half.weights[i] * normal_pdf(g) * logistic_sigmoid(-model.r * g);
  }
  return 2.0 * acc;
}

}  // namespace ddc
