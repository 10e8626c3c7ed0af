// Command-line front end: solve-field, build-pdf, simulate, scan, errors,
// fit-dropout, plot. Data goes to files/stdout, progress to stderr.
// Exit codes: 0 ok, 2 config error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qburst/config.hpp"
#include "qburst/pipeline.hpp"
#include "qburst/recovery.hpp"

namespace {

using namespace qburst;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string cache_dir;
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  int workers = -1;

  SimulationConfig resolve() const {
    SimulationConfig cfg = config_path.empty() ? SimulationConfig{} : load_config(config_path);
    if (seed != 0) cfg.run.seed = seed;
    if (events != 0) cfg.run.n_events = events;
    if (workers >= 0) cfg.run.workers = workers;
    if (!out_dir.empty()) cfg.run.out_dir = out_dir;
    if (!cache_dir.empty()) cfg.run.cache_dir = cache_dir;
    cfg.source.rng_seed = cfg.run.seed;
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file (defaults are built in)");
  cmd->add_option("--seed", args.seed, "override run.seed");
  cmd->add_option("--events", args.events, "override run.n_events");
  cmd->add_option("--workers", args.workers, "worker threads (0 = all cores)");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--cache-dir", args.cache_dir, "grid/pdf cache directory");
}

int cmd_solve_field(const CommonArgs& args, const std::string& qubit_id) {
  SimulationConfig cfg = args.resolve();
  std::filesystem::create_directories(cfg.run.cache_dir);
  const std::string id = qubit_id.empty() ? cfg.layout.qubits.front().id : qubit_id;
  std::cerr << "solving weighting field for " << id << "...\n";
  const WeightingGrid grid = solve_or_load(cfg.layout, id, cfg.grid, cfg.run.cache_dir);
  std::printf("qubit %s: grid %dx%dx%d, %d sweeps, residual %.3g\n", grid.qubit_id().c_str(),
              grid.nx(), grid.ny(), grid.nz(), grid.iterations(), grid.residual());
  const double a_center = grid.alpha_at({0, 0, cfg.layout.substrate.thickness_um - 1.0});
  const double a_edge = grid.alpha_or_zero({0.9 * cfg.grid.half_width_um, 0, 100.0});
  std::printf("alpha just below island %.4f, near subdomain edge %.3g\n", a_center, a_edge);
  return 0;
}

int cmd_build_pdf(const CommonArgs& args) {
  SimulationConfig cfg = args.resolve();
  std::filesystem::create_directories(cfg.run.cache_dir);
  std::cerr << "building charge pdf tables (" << cfg.run.pdf_samples_per_bin
            << " samples per origin bin)...\n";
  auto [e, h] = build_charge_pdf(cfg.transport, cfg.layout.substrate, cfg.run.pdf_samples_per_bin,
                                 cfg.run.seed);
  char name[64];
  std::snprintf(name, sizeof name, "/pdf_%016llx.bin",
                static_cast<unsigned long long>(e.key_hash));
  const std::string path = cfg.run.cache_dir + name;
  save_charge_pdfs(path, e, h);
  double esc = 0;
  for (int l = 0; l < e.layer_count(); ++l) esc = std::max(esc, e.layer(l).escaped);
  std::printf("wrote %s (%d layers, max escaped mass %.3f)\n", path.c_str(), e.layer_count(), esc);
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  SimulationConfig cfg = args.resolve();
  std::cerr << "simulate: " << cfg.run.n_events << " events, seed " << cfg.run.seed << "\n";
  const RunResult result = run_simulation(cfg);
  write_run_artifacts(result, cfg, cfg.run.out_dir);
  std::ifstream report(cfg.run.out_dir + "/report.txt");
  std::cout << report.rdbuf();
  std::cerr << "wall time " << result.wall_seconds << " s, artifacts in " << cfg.run.out_dir
            << "\n";
  return 0;
}

int cmd_errors(const CommonArgs& args) {
  SimulationConfig cfg = args.resolve();
  const RunResult result = run_simulation(cfg);
  std::filesystem::create_directories(cfg.run.out_dir);
  write_run_artifacts(result, cfg, cfg.run.out_dir);
  for (const auto& pe : result.errors.pairs) {
    std::printf("%s-%s (%.0f um):\n", pe.qubit_a.c_str(), pe.qubit_b.c_str(), pe.separation_um);
    for (const auto& pt : pe.phase) {
      std::printf("  phase > %.1e : %.4f +- %.4f\n", pt.level, pt.fraction, pt.se);
    }
    for (const auto& pt : pe.bit) {
      std::printf("  bit   > %.1e : %.4f +- %.4f\n", pt.level, pt.fraction, pt.se);
    }
  }
  std::printf("fault thresholds p_m at p=1e-2:");
  for (std::size_t m = 0; m < result.errors.threshold_pm.size(); ++m) {
    std::printf(" m=%zu: %.3g", m + 1, result.errors.threshold_pm[m]);
  }
  std::printf("\n");
  return 0;
}

int cmd_scan(const CommonArgs& args, std::vector<double> lambdas, std::vector<double> fqs) {
  SimulationConfig cfg = args.resolve();
  if (lambdas.empty()) lambdas = {100, 200, 300, 500, 1000};
  if (fqs.empty()) fqs = {1.0, 0.5, 0.2, 0.1};
  std::cerr << "scan over " << lambdas.size() << " x " << fqs.size() << " grid\n";
  const ScanResult scan = parameter_scan(cfg, lambdas, fqs);
  std::filesystem::create_directories(cfg.run.out_dir);
  write_scan_csv(scan, cfg, cfg.run.out_dir + "/scan.csv");
  for (const auto& row : scan.rows) {
    std::printf("%slambda=%6.0f fq=%4.2f score=%8.3f", row.best ? "* " : "  ",
                row.lambda_trap_um, row.charge_efficiency, row.score);
    for (const auto& ps : row.pairs) {
      std::printf("  p_corr(%s-%s)=%.3f", ps.stats.qubit_a.c_str(), ps.stats.qubit_b.c_str(),
                  ps.stats.p_corr);
    }
    std::printf("\n");
  }
  return 0;
}

int cmd_fit_dropout(const CommonArgs& args, const std::string& input, const std::string& fixture,
                    int events_per_point) {
  SimulationConfig cfg = args.resolve();
  std::vector<DropoutSample> samples;
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in) {
      std::cerr << "cannot open " << input << "\n";
      return 2;
    }
    double t, p;
    while (in >> t >> p) samples.push_back({t, p});
  } else {
    RngStream rng(cfg.run.seed, 0, rng_salt::measurement);
    samples = simulate_dropout_experiment(cfg.recovery, -600e-6, 1500e-6, 40e-6,
                                          events_per_point, rng);
    if (!fixture.empty()) {
      std::ofstream out(fixture);
      for (const auto& s : samples) out << s.t_s << " " << s.occupation << "\n";
      std::cerr << "wrote synthetic fixture to " << fixture << "\n";
    }
  }
  const DropoutFit fit = fit_dropout(samples, 100e-6, 150e-6);
  std::printf("tau   = %.4g +- %.2g s\nsigma = %.4g +- %.2g s\n", fit.tau_s, fit.tau_se,
              fit.sigma_s, fit.sigma_se);
  std::printf("residual %.4g after %d iterations%s\n", fit.residual_norm, fit.iterations,
              fit.tau_unbounded ? " (tau unbounded: flat data)" : "");
  const double dwell = phonon_dwell_time_s(cfg.layout);
  std::printf("phonon dwell-time estimate %.4g s\n", dwell);
  return 0;
}

int cmd_plot(const CommonArgs& args) {
  SimulationConfig cfg = args.resolve();
  plot_run_artifacts(cfg.run.out_dir);
  std::cerr << "wrote SVGs to " << cfg.run.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"charge-burst and correlated-error Monte Carlo for multiqubit chips"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string qubit_id, input, fixture;
  std::vector<double> lambdas, fqs;
  int events_per_point = 142;

  auto* solve = app.add_subcommand("solve-field", "solve and cache a weighting field");
  add_common(solve, args);
  solve->add_option("--qubit", qubit_id, "qubit id (default: first in layout)");

  auto* pdf = app.add_subcommand("build-pdf", "tabulate carrier displacement pdfs");
  add_common(pdf, args);

  auto* sim = app.add_subcommand("simulate", "run the full pipeline and write artifacts");
  add_common(sim, args);

  auto* err = app.add_subcommand("errors", "run the pipeline and print error exceedance");
  add_common(err, args);

  auto* scan = app.add_subcommand("scan", "pipeline over a lambda_trap x f_q grid");
  add_common(scan, args);
  scan->add_option("--lambda", lambdas, "trapping lengths (um)");
  scan->add_option("--fq", fqs, "charge production efficiencies");

  auto* fit = app.add_subcommand("fit-dropout", "fit the recovery transient");
  add_common(fit, args);
  fit->add_option("--input", input, "two-column (t_s, occupation) file; default: synthetic");
  fit->add_option("--write-fixture", fixture, "write the synthetic samples to a file");
  fit->add_option("--events-per-point", events_per_point, "averaging depth per time point");

  auto* plot = app.add_subcommand("plot", "emit SVG plots from a run directory");
  add_common(plot, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve_field(args, qubit_id);
    if (pdf->parsed()) return cmd_build_pdf(args);
    if (sim->parsed()) return cmd_simulate(args);
    if (err->parsed()) return cmd_errors(args);
    if (scan->parsed()) return cmd_scan(args, lambdas, fqs);
    if (fit->parsed()) return cmd_fit_dropout(args, input, fixture, events_per_point);
    if (plot->parsed()) return cmd_plot(args);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
