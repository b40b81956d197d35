#pragma once

// Finite-size training sets. Only the p observed coordinates are drawn; the unobserved
// part of the signal enters through sigma alone.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "ddc/error.hpp"
#include "ddc/model.hpp"

namespace ddc {

/// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for (base seed, grid index, trial index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t grid_index,
                                 std::uint64_t trial) {
  return splitmix64(splitmix64(splitmix64(seed) ^ grid_index) ^ trial);
}

using Rng = std::mt19937_64;

/// p = round(kappa n), ties to even.
inline long feature_count(long n, double kappa) {
  const double x = kappa * static_cast<double>(n);
  const double fl = std::floor(x);
  const double diff = x - fl;
  long p = static_cast<long>(fl);
  if (diff > 0.5 || (diff == 0.5 && (p % 2 != 0))) ++p;
  return p;
}

struct TrainSetMeta {
  long n = 0;
  long p = 0;
  double d = INFINITY;  ///< ambient dimension zeta n for the linear map, unbounded otherwise
  double s = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct TrainSet {
  Eigen::MatrixXd features;  ///< n x p, row i is w_i
  Eigen::VectorXd labels;    ///< entries +-1
  TrainSetMeta meta;

  long n() const { return meta.n; }
  long p() const { return meta.p; }
};

/// Draws n samples of the first p = round(kappa n) features.
/// beta0 is taken along the first axis with norm s.
inline TrainSet generate(const DataModelSpec& model, const FeatureMap& map, long n, double kappa,
                         std::uint64_t seed) {
  model.validate();
  map.validate();
  if (n < 2) throw BadShape("generate: need n >= 2");
  const SignalStrength st = signal_strength(map, kappa);
  const long p = feature_count(n, kappa);
  if (p < 1) throw BadShape("generate: p = round(kappa n) < 1");

  TrainSet ts;
  ts.meta = {n, p, map.kind == MapKind::Linear ? map.zeta * static_cast<double>(n) : INFINITY,
             st.s, st.sigma, seed};
  ts.features.resize(n, p);
  ts.labels.resize(n);

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < p; ++j) ts.features(i, j) = normal(rng);
    if (model.kind == ModelKind::Logistic) {
      const double latent = st.s * ts.features(i, 0) + st.sigma * normal(rng);
      ts.labels[i] = unif(rng) < logistic_sigmoid(latent) ? 1.0 : -1.0;
    } else {
      const double y = unif(rng) < model.prior_plus ? 1.0 : -1.0;
      ts.labels[i] = y;
      ts.features(i, 0) += y * st.s;
    }
  }
  return ts;
}

/// Writes "y,w_1,...,w_p" rows.
inline void write_csv(const TrainSet& ts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_csv: cannot open " + path);
  out.precision(17);
  out << "y";
  for (long j = 1; j <= ts.p(); ++j) out << ",w_" << j;
  out << '\n';
  for (long i = 0; i < ts.n(); ++i) {
    out << static_cast<int>(ts.labels[i]);
    for (long j = 0; j < ts.p(); ++j) out << ',' << ts.features(i, j);
    out << '\n';
  }
}

}  // namespace ddc
