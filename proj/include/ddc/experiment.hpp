#pragma once

// kappa sweeps: theory from the asymptotic solvers, Monte Carlo from the finite-size
// trainers, deterministic aggregation, CSV + JSON output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"

#include "ddc/datagen.hpp"
#include "ddc/error.hpp"
#include "ddc/ml_solver.hpp"
#include "ddc/model.hpp"
#include "ddc/phase_transition.hpp"
#include "ddc/svm_solver.hpp"
#include "ddc/trainers.hpp"
#include "ddc/version.hpp"

namespace ddc {

enum class SimMethod { Gd, Svm, Both };

inline std::string to_string(SimMethod m) {
  switch (m) {
    case SimMethod::Gd: return "gd";
    case SimMethod::Svm: return "svm";
    case SimMethod::Both: return "both";
  }
  return "?";
}

inline SimMethod parse_method(const std::string& s) {
  if (s == "gd") return SimMethod::Gd;
  if (s == "svm") return SimMethod::Svm;
  if (s == "both") return SimMethod::Both;
  throw ConfigError("unknown method '" + s + "' (gd|svm|both)");
}

inline std::string to_string(ModelKind k) {
  return k == ModelKind::Logistic ? "logistic" : "gm";
}

inline ModelKind parse_model(const std::string& s) {
  if (s == "logistic") return ModelKind::Logistic;
  if (s == "gm") return ModelKind::GaussianMixture;
  throw ConfigError("unknown model '" + s + "' (logistic|gm)");
}

inline std::string to_string(MapKind k) {
  switch (k) {
    case MapKind::Linear: return "linear";
    case MapKind::Polynomial: return "poly";
    case MapKind::Constant: return "constant";
  }
  return "?";
}

inline MapKind parse_map(const std::string& s) {
  if (s == "linear") return MapKind::Linear;
  if (s == "poly") return MapKind::Polynomial;
  if (s == "constant") return MapKind::Constant;
  throw ConfigError("unknown map '" + s + "' (linear|poly|constant)");
}

struct KappaGrid {
  double start = 0.1;
  double stop = 1.0;
  double step = 0.1;

  void validate() const {
    if (!(step > 0.0)) throw ConfigError("kappa_grid: step must be > 0");
    if (!(start > 0.0) || !(stop >= start)) throw ConfigError("kappa_grid: need 0 < start <= stop");
  }
  std::vector<double> points() const {
    validate();
    const long count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (long i = 0; i < count; ++i) out[i] = start + static_cast<double>(i) * step;
    return out;
  }
};

/// Parses "a:b:step".
inline KappaGrid parse_grid(const std::string& text) {
  KappaGrid g;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> g.start >> c1 >> g.stop >> c2 >> g.step) || c1 != ':' || c2 != ':') {
    throw ConfigError("kappa grid must look like start:stop:step, got '" + text + "'");
  }
  g.validate();
  return g;
}

struct Tolerances {
  double margin = 1e-3;
  double ml_damping = 0.5;
  double ml_step_tol = 1e-9;
  double ml_residual_tol = 1e-6;
  int ml_max_iterations = 10000;
  double svm_q_rel_tol = 1e-10;
  int svm_scan_points = 200;
  long gd_max_iterations = 200000;
  double gd_gradient_tol = 1e-8;
  double gd_direction_tol = 1e-9;
  double svm_kkt_tol = 1e-6;
};

struct ExperimentConfig {
  DataModelSpec model;
  FeatureMap map;
  KappaGrid kappa_grid;
  long n = 200;
  long trials = 0;
  std::uint64_t seed = 0;
  SimMethod method = SimMethod::Both;
  int quadrature_nodes = 64;
  Tolerances tolerances;

  QuadratureSpec quad() const { return {quadrature_nodes}; }

  void validate() const {
    model.validate();
    map.validate();
    kappa_grid.validate();
    if (std::abs(map.r - model.r) > 1e-12 * model.r) {
      throw ConfigError("config: feature map and model must share r");
    }
    if (trials < 0) throw ConfigError("config: trials must be >= 0");
    if (trials > 0 && n < 2) throw ConfigError("config: n must be >= 2");
    quad().validate();
  }
};

// JSON -----------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  const Tolerances& t = c.tolerances;
  j = nlohmann::json{
      {"model", {{"kind", to_string(c.model.kind)}, {"r", c.model.r}, {"prior_plus", c.model.prior_plus}}},
      {"map",
       {{"kind", to_string(c.map.kind)},
        {"zeta", c.map.zeta},
        {"gamma", c.map.gamma},
        {"s", c.map.constant_s}}},
      {"kappa_grid", {{"start", c.kappa_grid.start}, {"stop", c.kappa_grid.stop}, {"step", c.kappa_grid.step}}},
      {"n", c.n},
      {"trials", c.trials},
      {"seed", c.seed},
      {"method", to_string(c.method)},
      {"quadrature_nodes", c.quadrature_nodes},
      {"tolerances",
       {{"margin", t.margin},
        {"ml_damping", t.ml_damping},
        {"ml_step_tol", t.ml_step_tol},
        {"ml_residual_tol", t.ml_residual_tol},
        {"ml_max_iterations", t.ml_max_iterations},
        {"svm_q_rel_tol", t.svm_q_rel_tol},
        {"svm_scan_points", t.svm_scan_points},
        {"gd_max_iterations", t.gd_max_iterations},
        {"gd_gradient_tol", t.gd_gradient_tol},
        {"gd_direction_tol", t.gd_direction_tol},
        {"svm_kkt_tol", t.svm_kkt_tol}}}};
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  try {
    const auto& m = j.at("model");
    c.model.kind = parse_model(m.at("kind").get<std::string>());
    c.model.r = m.at("r").get<double>();
    c.model.prior_plus = m.value("prior_plus", 0.5);
    const auto& mp = j.at("map");
    c.map.kind = parse_map(mp.at("kind").get<std::string>());
    c.map.r = c.model.r;
    c.map.zeta = mp.value("zeta", 1.0);
    c.map.gamma = mp.value("gamma", 1.0);
    c.map.constant_s = mp.value("s", 0.0);
    const auto& g = j.at("kappa_grid");
    c.kappa_grid = {g.at("start").get<double>(), g.at("stop").get<double>(), g.at("step").get<double>()};
    c.n = j.value("n", 200L);
    c.trials = j.value("trials", 0L);
    c.seed = j.value("seed", std::uint64_t{0});
    c.method = parse_method(j.value("method", std::string("both")));
    c.quadrature_nodes = j.value("quadrature_nodes", 64);
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      Tolerances& o = c.tolerances;
      o.margin = t.value("margin", o.margin);
      o.ml_damping = t.value("ml_damping", o.ml_damping);
      o.ml_step_tol = t.value("ml_step_tol", o.ml_step_tol);
      o.ml_residual_tol = t.value("ml_residual_tol", o.ml_residual_tol);
      o.ml_max_iterations = t.value("ml_max_iterations", o.ml_max_iterations);
      o.svm_q_rel_tol = t.value("svm_q_rel_tol", o.svm_q_rel_tol);
      o.svm_scan_points = t.value("svm_scan_points", o.svm_scan_points);
      o.gd_max_iterations = t.value("gd_max_iterations", o.gd_max_iterations);
      o.gd_gradient_tol = t.value("gd_gradient_tol", o.gd_gradient_tol);
      o.gd_direction_tol = t.value("gd_direction_tol", o.gd_direction_tol);
      o.svm_kkt_tol = t.value("svm_kkt_tol", o.svm_kkt_tol);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c = j.get<ExperimentConfig>();
  c.validate();
  return c;
}

// Rows -------------------------------------------------------------------------

/// One kappa grid point. NaN marks an empty cell.
struct SweepRow {
  double kappa = NAN;
  double kappa_star = NAN;
  std::string regime;  ///< "ML" or "SVM"
  double s = NAN;
  double risk_theory = NAN;
  double excess_theory = NAN;
  double cosine_theory = NAN;
  double mu = NAN;
  double alpha = NAN;
  double lambda = NAN;
  double q_star = NAN;
  double rho_star = NAN;
  double normalized_margin = NAN;
  double risk_sim_mean = NAN;
  double risk_sim_std = NAN;
  double cosine_sim_mean = NAN;
  double train_error_mean = NAN;
  double sep_fraction = NAN;
  long trials = 0;
  long n = 0;
  std::uint64_t seed = 0;
  std::string solver_flags;
};

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "kappa", "kappa_star", "regime", "s", "risk_theory", "excess_theory", "cosine_theory",
      "mu", "alpha", "lambda", "q_star", "rho_star", "normalized_margin", "risk_sim_mean",
      "risk_sim_std", "cosine_sim_mean", "train_error_mean", "sep_fraction", "trials", "n",
      "seed", "solver_flags"};
  return cols;
}

namespace detail {

inline std::string cell(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : ""; }

inline double parse_cell(const std::string& s) {
  if (s.empty()) return NAN;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw ConfigError("csv: bad number '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline std::string csv_header() {
  std::string h;
  for (const auto& c : sweep_columns()) h += (h.empty() ? "" : ",") + c;
  return h;
}

inline std::string csv_line(const SweepRow& r) {
  using detail::cell;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                     cell(r.kappa), cell(r.kappa_star), r.regime, cell(r.s), cell(r.risk_theory),
                     cell(r.excess_theory), cell(r.cosine_theory), cell(r.mu), cell(r.alpha),
                     cell(r.lambda), cell(r.q_star), cell(r.rho_star), cell(r.normalized_margin),
                     cell(r.risk_sim_mean), cell(r.risk_sim_std), cell(r.cosine_sim_mean),
                     cell(r.train_error_mean), cell(r.sep_fraction), r.trials, r.n, r.seed,
                     r.solver_flags);
}

inline void write_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << csv_header() << '\n';
  for (const auto& r : rows) out << csv_line(r) << '\n';
}

inline void write_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  write_csv(rows, out);
}

inline std::vector<SweepRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw ConfigError("csv: unexpected header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != sweep_columns().size()) throw ConfigError("csv: wrong field count");
    using detail::parse_cell;
    SweepRow r;
    r.kappa = parse_cell(f[0]);
    r.kappa_star = parse_cell(f[1]);
    r.regime = f[2];
    r.s = parse_cell(f[3]);
    r.risk_theory = parse_cell(f[4]);
    r.excess_theory = parse_cell(f[5]);
    r.cosine_theory = parse_cell(f[6]);
    r.mu = parse_cell(f[7]);
    r.alpha = parse_cell(f[8]);
    r.lambda = parse_cell(f[9]);
    r.q_star = parse_cell(f[10]);
    r.rho_star = parse_cell(f[11]);
    r.normalized_margin = parse_cell(f[12]);
    r.risk_sim_mean = parse_cell(f[13]);
    r.risk_sim_std = parse_cell(f[14]);
    r.cosine_sim_mean = parse_cell(f[15]);
    r.train_error_mean = parse_cell(f[16]);
    r.sep_fraction = parse_cell(f[17]);
    r.trials = std::stol(f[18]);
    r.n = std::stol(f[19]);
    r.seed = std::stoull(f[20]);
    r.solver_flags = f[21];
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<SweepRow> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  return read_csv(in);
}

// Theory -----------------------------------------------------------------------

namespace detail {

inline void add_flag(std::string& flags, const std::string& f) {
  if (f.empty()) return;
  if (!flags.empty()) flags += ';';
  flags += f;
}

}  // namespace detail

inline MlOptions ml_options(const ExperimentConfig& c) {
  MlOptions o;
  o.damping = c.tolerances.ml_damping;
  o.step_tol = c.tolerances.ml_step_tol;
  o.residual_tol = c.tolerances.ml_residual_tol;
  o.max_iterations = c.tolerances.ml_max_iterations;
  o.margin = c.tolerances.margin;
  o.quad = c.quad();
  return o;
}

inline SvmOptions svm_options(const ExperimentConfig& c) {
  SvmOptions o;
  o.scan_points = c.tolerances.svm_scan_points;
  o.q_rel_tol = c.tolerances.svm_q_rel_tol;
  o.margin = c.tolerances.margin;
  o.quad = c.quad();
  return o;
}

/// Fills the theory columns of `row` for one kappa. Failures become flags; only
/// `strict` mode rethrows them.
inline void fill_theory(SweepRow& row, const ExperimentConfig& c, double kappa, double kappa_star,
                        bool strict = false) {
  row.kappa = kappa;
  row.kappa_star = kappa_star;
  if (!c.map.in_domain(kappa)) {
    detail::add_flag(row.solver_flags, "out-of-domain");
    if (strict) throw OutOfDomain("kappa outside the feature map domain");
    return;
  }
  const NoiseModelV noise = noise_at(c.model, c.map, kappa);
  row.s = noise.s;
  if (!std::isfinite(kappa_star)) {
    detail::add_flag(row.solver_flags, "kappa-star-failed");
    return;
  }
  row.regime = kappa < kappa_star ? "ML" : "SVM";
  const double margin = c.tolerances.margin;
  if (std::abs(kappa - kappa_star) < margin) {
    detail::add_flag(row.solver_flags, "near-threshold");
    if (strict) throw NotInRegime("kappa within the margin of kappa*");
    return;
  }
  try {
    if (kappa < kappa_star) {
      const MlSolution sol = solve_ml(c.model, c.map, kappa, kappa_star, ml_options(c));
      const Predictions pr = ml_predictions(sol, c.model, noise, c.quad());
      row.mu = sol.mu;
      row.alpha = sol.alpha;
      row.lambda = sol.lambda;
      row.risk_theory = pr.risk;
      row.excess_theory = pr.excess;
      row.cosine_theory = pr.cosine;
    } else {
      const SvmSolution sol = solve_svm(c.model, c.map, kappa, kappa_star, svm_options(c));
      const Predictions pr = svm_predictions(sol, c.model, noise, kappa, c.quad());
      row.q_star = sol.q_star;
      row.rho_star = sol.rho_star;
      row.normalized_margin = pr.normalized_margin;
      row.risk_theory = pr.risk;
      row.excess_theory = pr.excess;
      row.cosine_theory = pr.cosine;
    }
  } catch (const MlNoConvergence&) {
    detail::add_flag(row.solver_flags, "ml-no-convergence");
    if (strict) throw;
  } catch (const BracketFailure&) {
    detail::add_flag(row.solver_flags, "svm-bracket-failure");
    if (strict) throw;
  } catch (const Error&) {
    detail::add_flag(row.solver_flags, "theory-error");
    if (strict) throw;
  }
}

/// kappa* or NaN if the threshold equation has no root.
inline double kappa_star_or_nan(const ExperimentConfig& c) {
  try {
    return solve_kappa_star(c.model, c.map, c.quad()).kappa_star;
  } catch (const Error&) {
    return NAN;
  }
}

// Simulation -------------------------------------------------------------------

struct TrialResult {
  double risk = NAN;
  double cosine = NAN;
  double train_error = NAN;
  bool separable = false;
  bool gd_cap = false;
  bool disagreement = false;  ///< GD zero-training-error witness contradicts svm_train
  bool svm_kkt_cap = false;
};

inline GdConfig gd_config(const Tolerances& t) {
  GdConfig g;
  g.max_iterations = t.gd_max_iterations;
  g.gradient_tol = t.gd_gradient_tol;
  g.direction_tol = t.gd_direction_tol;
  return g;
}

/// One Monte Carlo trial.
///  gd:   full gradient descent; separability witnessed by zero training error.
///  svm:  svm_train only; risk recorded for separable draws.
///  both: svm_train decides separability; separable draws use the SVM solution with GD
///        run until zero training error as a witness, the others use converged GD.
inline TrialResult run_trial(const ExperimentConfig& c, double kappa, std::uint64_t trial_seed) {
  const TrainSet ts = generate(c.model, c.map, c.n, kappa, trial_seed);
  const NoiseModelV noise = noise_at(c.model, c.map, kappa);
  const GdConfig gdc = gd_config(c.tolerances);
  SvmTrainConfig svc;
  svc.kkt_tol = c.tolerances.svm_kkt_tol;
  svc.seed = trial_seed;
  TrialResult out;
  auto record = [&](const TrainedClassifier& tc) {
    out.train_error = tc.train_error;
    if (tc.beta.norm() > 0.0) {
      const ExactMetrics m = exact_metrics(tc.beta, c.model, noise, c.quad());
      out.risk = m.risk;
      out.cosine = m.cosine;
    }
  };
  switch (c.method) {
    case SimMethod::Gd: {
      const TrainedClassifier gd = gd_logistic(ts, gdc);
      out.gd_cap = gd.diagnostics.stop == StopReason::IterationCap && gd.train_error > 0.0;
      out.separable = gd.train_error == 0.0;
      record(gd);
      break;
    }
    case SimMethod::Svm: {
      const TrainedClassifier sv = svm_train(ts, svc);
      out.separable = sv.separable;
      out.svm_kkt_cap = sv.separable && sv.diagnostics.stop == StopReason::IterationCap;
      if (sv.separable) {
        record(sv);
      } else {
        out.train_error = sv.train_error;
      }
      break;
    }
    case SimMethod::Both: {
      const TrainedClassifier sv = svm_train(ts, svc);
      out.separable = sv.separable;
      if (sv.separable) {
        out.svm_kkt_cap = sv.diagnostics.stop == StopReason::IterationCap;
        GdConfig witness = gdc;
        witness.stop_at_zero_train_error = true;
        const TrainedClassifier gd = gd_logistic(ts, witness);
        out.disagreement = gd.train_error > 0.0;
        record(sv);
      } else {
        const TrainedClassifier gd = gd_logistic(ts, gdc);
        out.gd_cap = gd.diagnostics.stop == StopReason::IterationCap;
        out.disagreement = gd.train_error == 0.0;
        record(gd);
      }
      break;
    }
  }
  return out;
}

/// Mean/std aggregation in trial order.
inline void fill_simulation(SweepRow& row, const std::vector<TrialResult>& trials) {
  row.trials = static_cast<long>(trials.size());
  if (trials.empty()) return;
  double sep = 0.0, te = 0.0;
  long te_count = 0, gd_cap = 0, disagree = 0, kkt_cap = 0;
  std::vector<double> risks, cosines;
  for (const auto& t : trials) {
    sep += t.separable ? 1.0 : 0.0;
    if (std::isfinite(t.train_error)) {
      te += t.train_error;
      ++te_count;
    }
    if (std::isfinite(t.risk)) {
      risks.push_back(t.risk);
      cosines.push_back(t.cosine);
    }
    gd_cap += t.gd_cap;
    disagree += t.disagreement;
    kkt_cap += t.svm_kkt_cap;
  }
  row.sep_fraction = sep / static_cast<double>(trials.size());
  if (te_count > 0) row.train_error_mean = te / static_cast<double>(te_count);
  if (!risks.empty()) {
    double m = 0.0, cm = 0.0;
    for (std::size_t i = 0; i < risks.size(); ++i) {
      m += risks[i];
      cm += cosines[i];
    }
    m /= static_cast<double>(risks.size());
    cm /= static_cast<double>(risks.size());
    row.risk_sim_mean = m;
    row.cosine_sim_mean = cm;
    if (risks.size() > 1) {
      double ss = 0.0;
      for (double r : risks) ss += (r - m) * (r - m);
      row.risk_sim_std = std::sqrt(ss / static_cast<double>(risks.size() - 1));
    }
  }
  if (risks.size() < trials.size()) {
    detail::add_flag(row.solver_flags, fmt::format("sim-risk-trials={}", risks.size()));
  }
  if (gd_cap > 0) detail::add_flag(row.solver_flags, fmt::format("gd-iteration-cap={}", gd_cap));
  if (disagree > 0) {
    detail::add_flag(row.solver_flags, fmt::format("separability-disagreement={}", disagree));
  }
  if (kkt_cap > 0) detail::add_flag(row.solver_flags, fmt::format("svm-kkt-cap={}", kkt_cap));
}

// Runner -----------------------------------------------------------------------

/// Worker count: explicit value if > 0, else DDC_THREADS, else hardware concurrency.
inline int resolve_threads(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DDC_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs task(i) for i in [0, count) on a bounded pool.
template <class Task>
void parallel_for(std::size_t count, int threads, Task&& task) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Theory and simulation for every grid point. Rows come back sorted by kappa, and the
/// output depends only on the config.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& c, int threads = 0) {
  c.validate();
  const std::vector<double> kappas = c.kappa_grid.points();
  const double kstar = kappa_star_or_nan(c);
  const std::size_t nk = kappas.size();
  const std::size_t nt = static_cast<std::size_t>(c.trials);

  std::vector<SweepRow> rows(nk);
  std::vector<std::vector<TrialResult>> results(nk);
  std::vector<std::string> trial_errors(nk * nt);
  for (auto& r : results) r.resize(nt);
  std::vector<bool> simulate(nk, false);
  for (std::size_t k = 0; k < nk; ++k) {
    simulate[k] = c.map.in_domain(kappas[k]) && feature_count(c.n, kappas[k]) >= 1;
  }

  const int workers = resolve_threads(threads);
  parallel_for(nk + nk * nt, workers, [&](std::size_t task) {
    if (task < nk) {
      SweepRow& row = rows[task];
      fill_theory(row, c, kappas[task], kstar);
      return;
    }
    const std::size_t k = (task - nk) / nt;
    const std::size_t t = (task - nk) % nt;
    if (!simulate[k]) return;
    try {
      results[k][t] = run_trial(c, kappas[k], derive_seed(c.seed, k, t));
    } catch (const Error& e) {
      trial_errors[k * nt + t] = e.what();
    }
  });

  for (std::size_t k = 0; k < nk; ++k) {
    SweepRow& row = rows[k];
    row.n = c.n;
    row.seed = c.seed;
    if (nt == 0) continue;
    if (!simulate[k]) {
      detail::add_flag(row.solver_flags, "no-simulation");
      row.trials = static_cast<long>(nt);
      continue;
    }
    fill_simulation(row, results[k]);
    long errors = 0;
    for (std::size_t t = 0; t < nt; ++t) errors += !trial_errors[k * nt + t].empty();
    if (errors > 0) detail::add_flag(row.solver_flags, fmt::format("trial-errors={}", errors));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.kappa < b.kappa; });
  return rows;
}

inline nlohmann::json sidecar(const ExperimentConfig& c, const std::vector<SweepRow>& rows) {
  nlohmann::json j;
  j["library_version"] = kLibraryVersion;
  j["config"] = c;
  j["columns"] = sweep_columns();
  j["rows"] = rows.size();
  const double ks = rows.empty() ? NAN : rows.front().kappa_star;
  j["kappa_star"] = std::isfinite(ks) ? nlohmann::json(ks) : nlohmann::json(nullptr);
  return j;
}

/// Writes <dir>/sweep.csv and <dir>/sweep.json.
inline void write_sweep(const std::string& dir, const ExperimentConfig& c,
                        const std::vector<SweepRow>& rows) {
  std::filesystem::create_directories(dir);
  write_csv(rows, (std::filesystem::path(dir) / "sweep.csv").string());
  std::ofstream js(std::filesystem::path(dir) / "sweep.json");
  if (!js) throw ConfigError("cannot write sidecar in " + dir);
  js << sidecar(c, rows).dump(2) << '\n';
}

}  // namespace ddc
