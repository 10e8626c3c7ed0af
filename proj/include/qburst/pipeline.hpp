#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qburst/config.hpp"
#include "qburst/stats.hpp"

namespace qburst {

class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PairSummary {
  PairStats stats;
  std::optional<Asymmetry> asym_1324;
};

struct RunResult {
  std::vector<ImpactEvent> events;
  std::vector<EventOutcome> outcomes;
  std::vector<JumpRecord> jumps;
  std::vector<PairSummary> pairs;  // all qubit pairs, layout order
  std::optional<Asymmetry> charge_asym;
  RatesReport rates;
  ErrorReport errors;
  std::uint64_t n_cycles = 0;  // series mode
  std::uint64_t skipped_deposits = 0;
  double wall_seconds = 0;
  std::string manifest_hash;
};

// Shared immutable per-run state: solved grids (deduplicated by geometry
// hash) and optional pdf tables.
struct PipelineContext {
  std::vector<const WeightingGrid*> grid_of_qubit;
  std::vector<std::unique_ptr<WeightingGrid>> grids;
  std::shared_ptr<const ChargePdf> pdf_electrons, pdf_holes;
  double dispersion_rad_s = 0;

  static PipelineContext prepare(const SimulationConfig& config, bool parallel_solve = true);
};

// Full event pipeline: sample -> pairs -> transport -> induced charge ->
// noise -> error models -> statistics. Deterministic for a fixed
// (config, seed) independent of worker count.
RunResult run_simulation(const SimulationConfig& config);
RunResult run_simulation(const SimulationConfig& config, const PipelineContext& ctx);

// Serial reference for the event loop; bitwise-identical to the OpenMP path.
std::vector<EventOutcome> process_events(const SimulationConfig& config,
                                         const PipelineContext& ctx,
                                         const std::vector<ImpactEvent>& events, bool parallel);

// Writes events.jsonl, outcomes.csv/.bin, pair_stats.csv, report.txt,
// joint histograms, exceedance.csv and manifest.json under out_dir.
void write_run_artifacts(const RunResult& result, const SimulationConfig& config,
                         const std::string& out_dir);

struct ScanTarget {
  double separation_um;
  double value;
  double scale;
};

struct ScanRow {
  double lambda_trap_um = 0;
  double charge_efficiency = 0;
  std::vector<PairSummary> pairs;
  std::optional<Asymmetry> charge_asym;
  double score = 0;
  bool best = false;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  int best_index = -1;
};

const std::vector<ScanTarget>& default_scan_targets();

// Re-runs the pipeline over a (lambda_trap, f_q) grid with common random
// numbers and scores each point against the target statistics.
ScanResult parameter_scan(const SimulationConfig& config, const std::vector<double>& lambdas_um,
                          const std::vector<double>& efficiencies,
                          const std::vector<ScanTarget>& targets = default_scan_targets());

void write_scan_csv(const ScanResult& scan, const SimulationConfig& config,
                    const std::string& path);

// SVG emission from a finished run directory ("plot" subcommand); checks
// that all inputs carry the same manifest hash.
void plot_run_artifacts(const std::string& out_dir);

}  // namespace qburst
