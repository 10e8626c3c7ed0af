// Serial vs OpenMP timing for the two hot kernels: the red-black SOR field
// solve and the per-event transport/induced-charge loop.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qburst/config.hpp"
#include "qburst/pipeline.hpp"

using namespace qburst;

namespace {

double seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  int n_events = argc > 1 ? std::atoi(argv[1]) : 1500;

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both paths run serial\n");
#endif

  SimulationConfig cfg;
  cfg.run.cache_dir.clear();  // always solve fresh so both paths are timed
  cfg.run.n_events = n_events;

  // medium solver grid so a bench run stays in seconds
  GridSpec spec = cfg.grid;
  spec.half_width_um = 1000.0;
  spec.vacuum_below_um = 400.0;
  spec.tolerance = 1e-5;

  std::printf("\n-- weighting-field SOR solve --\n");
  auto t0 = std::chrono::steady_clock::now();
  const WeightingGrid serial =
      solve_weighting(cfg.layout, "Q1", spec, SolveOptions{.parallel = false});
  const double t_serial = seconds(t0);
  t0 = std::chrono::steady_clock::now();
  const WeightingGrid parallel =
      solve_weighting(cfg.layout, "Q1", spec, SolveOptions{.parallel = true});
  const double t_parallel = seconds(t0);
  double max_diff = 0;
  for (int k = 0; k < serial.nz(); ++k) {
    for (int j = 0; j < serial.ny(); ++j) {
      for (int i = 0; i < serial.nx(); ++i) {
        max_diff = std::max(max_diff, std::abs(serial.value(i, j, k) - parallel.value(i, j, k)));
      }
    }
  }
  std::printf("grid %dx%dx%d, %d sweeps\n", serial.nx(), serial.ny(), serial.nz(),
              serial.iterations());
  std::printf("serial   %8.2f s\n", t_serial);
  std::printf("openmp   %8.2f s   speedup %.2fx   max |serial-openmp| = %.3g\n", t_parallel,
              t_serial / t_parallel, max_diff);

  std::printf("\n-- event pipeline (%d events) --\n", n_events);
  cfg.grid = spec;
  const PipelineContext ctx = PipelineContext::prepare(cfg, true);
  const auto events = sample_event_stream(cfg.source, cfg.layout.substrate, cfg.run.n_events);

  t0 = std::chrono::steady_clock::now();
  const auto out_serial = process_events(cfg, ctx, events, false);
  const double e_serial = seconds(t0);
  t0 = std::chrono::steady_clock::now();
  const auto out_parallel = process_events(cfg, ctx, events, true);
  const double e_parallel = seconds(t0);

  bool identical = out_serial.size() == out_parallel.size();
  for (std::size_t i = 0; identical && i < out_serial.size(); ++i) {
    for (std::size_t q = 0; q < out_serial[i].per_qubit.size(); ++q) {
      if (out_serial[i].per_qubit[q].dq_measured_e != out_parallel[i].per_qubit[q].dq_measured_e ||
          out_serial[i].per_qubit[q].eps_theta != out_parallel[i].per_qubit[q].eps_theta) {
        identical = false;
        break;
      }
    }
  }
  std::printf("serial   %8.2f s  (%.0f events/s)\n", e_serial, n_events / e_serial);
  std::printf("openmp   %8.2f s  (%.0f events/s)   speedup %.2fx   bitwise %s\n", e_parallel,
              n_events / e_parallel, e_serial / e_parallel, identical ? "identical" : "DIFFERENT");
  return identical ? 0 : 1;
}
