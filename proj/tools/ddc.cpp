// ddc: theory curves, phase transition, Monte Carlo and sweeps from the command line.
//
// exit codes: 0 ok, 1 configuration error, 2 solver failure in single-point mode

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "ddc/ddc.hpp"

namespace {

struct ModelArgs {
  std::string model = "logistic";
  std::string map = "poly";
  double r = 1.0;
  std::optional<double> zeta;
  std::optional<double> gamma;
  std::optional<double> s;
  int nodes = 64;
};

void add_model_options(CLI::App* app, ModelArgs& a) {
  app->add_option("--model", a.model, "logistic | gm")->required();
  app->add_option("--map", a.map, "linear | poly | constant")->required();
  app->add_option("--r", a.r, "total signal strength")->required();
  app->add_option("--zeta", a.zeta, "linear map: d / n");
  app->add_option("--gamma", a.gamma, "polynomial map exponent");
  app->add_option("--s", a.s, "constant map: fixed s");
  app->add_option("--nodes", a.nodes, "quadrature nodes per dimension");
}

ddc::ExperimentConfig base_config(const ModelArgs& a) {
  ddc::ExperimentConfig c;
  c.model.kind = ddc::parse_model(a.model);
  c.model.r = a.r;
  c.map.kind = ddc::parse_map(a.map);
  c.map.r = a.r;
  switch (c.map.kind) {
    case ddc::MapKind::Linear:
      if (!a.zeta) throw ddc::ConfigError("--map linear needs --zeta");
      c.map.zeta = *a.zeta;
      break;
    case ddc::MapKind::Polynomial:
      if (!a.gamma) throw ddc::ConfigError("--map poly needs --gamma");
      c.map.gamma = *a.gamma;
      break;
    case ddc::MapKind::Constant:
      if (!a.s) throw ddc::ConfigError("--map constant needs --s");
      c.map.constant_s = *a.s;
      break;
  }
  c.quadrature_nodes = a.nodes;
  c.validate();
  return c;
}

void emit(const std::vector<ddc::SweepRow>& rows, const std::string& out) {
  if (out.empty() || out == "-") {
    ddc::write_csv(rows, std::cout);
  } else {
    ddc::write_csv(rows, out);
  }
}

int run_theory(const ModelArgs& a, std::optional<double> kappa, const std::string& grid,
               const std::string& out) {
  ddc::ExperimentConfig c = base_config(a);
  if (kappa.has_value() == !grid.empty()) {
    throw ddc::ConfigError("give exactly one of --kappa and --kappa-grid");
  }
  const double kstar = ddc::solve_kappa_star(c.model, c.map, c.quad()).kappa_star;
  std::vector<ddc::SweepRow> rows;
  if (kappa) {
    ddc::SweepRow row;
    ddc::fill_theory(row, c, *kappa, kstar, true);
    rows.push_back(row);
  } else {
    c.kappa_grid = ddc::parse_grid(grid);
    rows = ddc::run_sweep(c);
  }
  emit(rows, out);
  return 0;
}

int run_phase(const ModelArgs& a, int points, const std::string& out) {
  const ddc::ExperimentConfig c = base_config(a);
  const ddc::PhaseResult ph = ddc::solve_kappa_star(c.model, c.map, c.quad());
  std::vector<double> kappas;
  const double hi = std::min(1.0, c.map.kappa_max());
  for (int i = 1; i <= points; ++i) kappas.push_back(hi * i / points);
  const auto curve = ddc::g_curve(c.model, c.map, kappas, c.quad());
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty() && out != "-") {
    file.open(out);
    if (!file) throw ddc::ConfigError("cannot write " + out);
    os = &file;
  }
  std::cout << fmt::format("kappa_star={:.17g}\n", ph.kappa_star);
  *os << "kappa,g\n";
  for (const auto& p : curve) *os << fmt::format("{:.17g},{:.17g}\n", p.kappa, p.g);
  return 0;
}

int run_simulate(const ModelArgs& a, double kappa, long n, long trials, std::uint64_t seed,
                 const std::string& method, const std::string& out, int threads) {
  ddc::ExperimentConfig c = base_config(a);
  c.n = n;
  c.trials = trials;
  c.seed = seed;
  c.method = ddc::parse_method(method);
  c.kappa_grid = {kappa, kappa, 1.0};
  c.validate();
  if (trials < 1) throw ddc::ConfigError("--trials must be >= 1");
  if (ddc::feature_count(n, kappa) < 1) throw ddc::ConfigError("round(kappa n) must be >= 1");
  auto rows = ddc::run_sweep(c, threads);
  emit(rows, out);
  return 0;
}

int run_sweep_cmd(const std::string& config, const std::string& out_dir, int threads) {
  const ddc::ExperimentConfig c = ddc::load_config(config);
  const auto rows = ddc::run_sweep(c, threads);
  ddc::write_sweep(out_dir, c, rows);
  std::cerr << fmt::format("wrote {} rows to {}/sweep.csv\n", rows.size(), out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"double descent in linear classification: asymptotic theory and simulation"};
  app.require_subcommand(1);

  ModelArgs theory_args, phase_args, sim_args;
  std::optional<double> kappa;
  std::string grid, theory_out;
  auto* theory = app.add_subcommand("theory", "asymptotic risk, cosine and solver state");
  add_model_options(theory, theory_args);
  theory->add_option("--kappa", kappa, "single kappa");
  theory->add_option("--kappa-grid", grid, "start:stop:step");
  theory->add_option("--out", theory_out, "CSV path (default stdout)");

  int phase_points = 50;
  std::string phase_out;
  auto* phase = app.add_subcommand("phase", "threshold kappa* and the curve g(kappa)");
  add_model_options(phase, phase_args);
  phase->add_option("--points", phase_points, "g-curve grid size")->check(CLI::PositiveNumber);
  phase->add_option("--out", phase_out, "g-curve CSV path (default stdout)");

  double sim_kappa = 0.0;
  long sim_n = 200, sim_trials = 1;
  std::uint64_t sim_seed = 0;
  std::string sim_method = "both", sim_out;
  int sim_threads = 0;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo at one kappa next to the theory");
  add_model_options(sim, sim_args);
  sim->add_option("--kappa", sim_kappa)->required();
  sim->add_option("--n", sim_n)->required();
  sim->add_option("--trials", sim_trials)->required();
  sim->add_option("--seed", sim_seed)->required();
  sim->add_option("--method", sim_method, "gd | svm | both");
  sim->add_option("--out", sim_out, "CSV path (default stdout)");
  sim->add_option("--threads", sim_threads);

  std::string config, out_dir;
  int threads = 0;
  auto* sweep = app.add_subcommand("sweep", "kappa sweep from a JSON config");
  sweep->add_option("--config", config)->required();
  sweep->add_option("--out-dir", out_dir)->required();
  sweep->add_option("--threads", threads, "worker threads (default DDC_THREADS or all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*theory) return run_theory(theory_args, kappa, grid, theory_out);
    if (*phase) return run_phase(phase_args, phase_points, phase_out);
    if (*sim) {
      return run_simulate(sim_args, sim_kappa, sim_n, sim_trials, sim_seed, sim_method, sim_out,
                          sim_threads);
    }
    if (*sweep) return run_sweep_cmd(config, out_dir, threads);
  } catch (const ddc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ddc::OutOfDomain& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
