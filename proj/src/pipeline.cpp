#include "qburst/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qburst/svg.hpp"
#include "qburst/units.hpp"

namespace qburst {

namespace fs = std::filesystem;

PipelineContext PipelineContext::prepare(const SimulationConfig& config, bool parallel_solve) {
  config.validate();
  PipelineContext ctx;
  std::map<std::uint64_t, const WeightingGrid*> by_hash;
  for (const auto& q : config.layout.qubits) {
    const std::uint64_t key = config.grid.key_hash(config.layout.substrate, q);
    auto it = by_hash.find(key);
    if (it == by_hash.end()) {
      SolveOptions opts;
      opts.parallel = parallel_solve;
      auto grid = std::make_unique<WeightingGrid>(
          solve_or_load(config.layout, q.id, config.grid, config.run.cache_dir, opts));
      it = by_hash.emplace(key, grid.get()).first;
      ctx.grids.push_back(std::move(grid));
    }
    ctx.grid_of_qubit.push_back(it->second);
  }
  ctx.dispersion_rad_s = charge_dispersion_rad_s(config.transmon);

  if (config.run.transport_mode == TransportMode::pdf) {
    const ChargePdfSpec pdf_spec;
    const std::uint64_t key = pdf_spec.key_hash(config.transport, config.layout.substrate,
                                                config.run.pdf_samples_per_bin, config.run.seed);
    std::string path;
    if (!config.run.cache_dir.empty()) {
      fs::create_directories(config.run.cache_dir);
      char name[64];
      std::snprintf(name, sizeof name, "/pdf_%016llx.bin", static_cast<unsigned long long>(key));
      path = config.run.cache_dir + name;
    }
    bool loaded = false;
    if (!path.empty() && fs::exists(path)) {
      auto [e, h] = load_charge_pdfs(path);
      if (e.key_hash == key) {
        ctx.pdf_electrons = std::make_shared<ChargePdf>(std::move(e));
        ctx.pdf_holes = std::make_shared<ChargePdf>(std::move(h));
        loaded = true;
      }
    }
    if (!loaded) {
      auto [e, h] = build_charge_pdf(config.transport, config.layout.substrate,
                                     config.run.pdf_samples_per_bin, config.run.seed, {},
                                     parallel_solve);
      if (!path.empty()) save_charge_pdfs(path, e, h);
      ctx.pdf_electrons = std::make_shared<ChargePdf>(std::move(e));
      ctx.pdf_holes = std::make_shared<ChargePdf>(std::move(h));
    }
  }
  return ctx;
}

namespace {

EventOutcome process_one(const SimulationConfig& config, const PipelineContext& ctx,
                         const ImpactEvent& event) {
  const std::uint64_t seed = config.run.seed;
  const std::uint64_t id = event.event_id;

  RngStream pair_rng(seed, id, rng_salt::pair_creation);
  const PairCreation pairs = create_pairs(event, config.transport, pair_rng);

  RngStream trans_rng(seed, id, rng_salt::transport);
  CarrierSet carriers;
  if (config.run.transport_mode == TransportMode::pdf) {
    carriers = transport_via_pdf(*ctx.pdf_electrons, *ctx.pdf_holes, pairs,
                                 config.layout.substrate, id, trans_rng);
  } else {
    carriers = transport(pairs, config.transport, config.layout.substrate, id, trans_rng);
  }

  RngStream dipole_rng(seed, id, rng_salt::dipole);
  const std::vector<Vec3> dipole_dirs = draw_dipole_directions(pairs.clusters.size(), dipole_rng);

  EventOutcome out;
  out.event_id = id;
  out.species = event.species;
  out.time_s = event.time_s;
  out.per_qubit.resize(config.layout.qubits.size());
  for (std::size_t q = 0; q < config.layout.qubits.size(); ++q) {
    const WeightingGrid& grid = *ctx.grid_of_qubit[q];
    const Vec3 center = config.layout.qubits[q].center();
    QubitOutcome& qo = out.per_qubit[q];
    qo.dq_raw_e = induced_offset_charge(carriers, grid, center);
    qo.dq_aliased_e = alias_charge(qo.dq_raw_e);
    RngStream noise_rng(seed, id * 64 + q, rng_salt::measurement);
    const double noise =
        config.measurement.sigma_q_e > 0 ? config.measurement.sigma_q_e * noise_rng.normal() : 0.0;
    qo.dq_measured_e = alias_charge(qo.dq_aliased_e + noise);
    // dephasing sees the unaliased jump (the sine is 2e-periodic); the same
    // noise draw enters here when the error models follow the reconstruction
    const double dq_eps =
        config.measurement.noise_in_errors ? qo.dq_raw_e + noise : qo.dq_raw_e;
    qo.eps_phi = phase_flip_error(dq_eps, ctx.dispersion_rad_s, config.transmon.cycle_time_s);
    const TransientResult tr = dipole_transient_error(
        pairs, grid, center, config.transmon, config.layout.substrate.sound_speed_m_s,
        std::span<const Vec3>(dipole_dirs));
    qo.eps_theta = tr.eps_theta;
    qo.transient_energy_ec = tr.energy_ec;
    qo.transient_skipped = tr.skipped_deposits;
  }
  return out;
}

}  // namespace

std::vector<EventOutcome> process_events(const SimulationConfig& config,
                                         const PipelineContext& ctx,
                                         const std::vector<ImpactEvent>& events, bool parallel) {
  std::vector<EventOutcome> outcomes(events.size());
  if (parallel) {
#ifdef _OPENMP
    if (config.run.workers > 0) omp_set_num_threads(config.run.workers);
#endif
    // exceptions cannot unwind out of the parallel region; carry the first
    // failure across and rethrow on the calling thread
    std::string failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < static_cast<long>(events.size()); ++i) {
      try {
        outcomes[i] = process_one(config, ctx, events[i]);
      } catch (const std::exception& e) {
#pragma omp critical
        if (failure.empty()) failure = e.what();
      }
    }
    if (!failure.empty()) throw numeric_error("event processing failed: " + failure);
  } else {
    for (std::size_t i = 0; i < events.size(); ++i) {
      outcomes[i] = process_one(config, ctx, events[i]);
    }
  }
  return outcomes;
}

namespace {

std::vector<std::pair<int, int>> all_pairs(const ChipLayout& layout) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < static_cast<int>(layout.qubits.size()); ++i) {
    for (int j = i + 1; j < static_cast<int>(layout.qubits.size()); ++j) {
      pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

double pair_separation(const ChipLayout& layout, int a, int b) {
  const auto& qa = layout.qubits[a];
  const auto& qb = layout.qubits[b];
  return std::hypot(qa.center_x_um - qb.center_x_um, qa.center_y_um - qb.center_y_um);
}

}  // namespace

RunResult run_simulation(const SimulationConfig& config) {
  const PipelineContext ctx = PipelineContext::prepare(config);
  return run_simulation(config, ctx);
}

RunResult run_simulation(const SimulationConfig& config, const PipelineContext& ctx) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  RunResult result;
  result.manifest_hash = config.config_hash_hex();

  if (config.run.mode == RunMode::series && config.run.n_events == 0) {
    result.events =
        sample_event_stream_for(config.source, config.layout.substrate, config.run.duration_s);
  } else {
    result.events = sample_event_stream(config.source, config.layout.substrate, config.run.n_events);
  }
  result.outcomes = process_events(config, ctx, result.events, true);

  const std::vector<std::string> names = [&] {
    std::vector<std::string> n;
    for (const auto& q : config.layout.qubits) n.push_back(q.id);
    return n;
  }();
  const auto pairs = all_pairs(config.layout);

  if (config.run.mode == RunMode::series) {
    const double duration = config.run.duration_s;
    const auto cycles = bin_into_cycles(result.outcomes, names.size(), config.run.cycle_time_s,
                                        duration, config.measurement.sigma_q_e, config.run.seed);
    result.n_cycles = cycles.size();
    result.jumps = detect_jumps_cycles(cycles, config.run.jump_threshold_e);
  } else {
    result.jumps = detect_jumps(result.outcomes, config.run.jump_threshold_e);
    result.n_cycles = result.jumps.size();
  }

  for (const auto& [a, b] : pairs) {
    PairSummary ps;
    ps.stats = pair_stats(result.jumps, a, b, names[a], names[b], pair_separation(config.layout, a, b));
    ps.asym_1324 = asymmetry_1324(result.jumps, a, b);
    result.pairs.push_back(std::move(ps));
  }
  result.charge_asym = charge_asymmetry(result.jumps);
  if (!result.jumps.empty()) {
    result.rates = rates_report(result.jumps, names, pairs, config.run.cycle_time_s);
  }

  std::vector<double> separations;
  for (const auto& [a, b] : pairs) separations.push_back(pair_separation(config.layout, a, b));
  const std::vector<double> levels{1e-9, 2e-9, 3e-9, 1e-8, 3e-8, 1e-7, 3e-7,
                                   1e-6, 3e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3};
  if (!result.outcomes.empty()) {
    result.errors =
        exceedance_curves(result.outcomes, pairs, names, separations, levels, config.joint_rule);
  }

  for (const auto& ev : result.outcomes) {
    for (const auto& qo : ev.per_qubit) result.skipped_deposits += qo.transient_skipped;
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

namespace {

void write_outcomes_csv(const RunResult& result, const SimulationConfig& config,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw numeric_error("cannot write " + path);
  out << "# qburst outcomes v1\n# manifest " << result.manifest_hash << "\n";
  out << "event_id,species,time_s,qubit,dq_raw_e,dq_aliased_e,dq_measured_e,eps_phi,eps_theta,"
         "transient_energy_ec\n";
  char buf[512];
  for (const auto& ev : result.outcomes) {
    for (std::size_t q = 0; q < ev.per_qubit.size(); ++q) {
      const auto& qo = ev.per_qubit[q];
      std::snprintf(buf, sizeof buf,
                    "%llu,%s,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    static_cast<unsigned long long>(ev.event_id), species_name(ev.species),
                    ev.time_s, config.layout.qubits[q].id.c_str(), qo.dq_raw_e, qo.dq_aliased_e,
                    qo.dq_measured_e, qo.eps_phi, qo.eps_theta, qo.transient_energy_ec);
      out << buf;
    }
  }
}

void write_outcomes_bin(const RunResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw numeric_error("cannot write " + path);
  const char magic[8] = {'Q', 'B', 'L', 'G', '0', '0', '0', '1'};
  out.write(magic, sizeof magic);
  const std::uint32_t nq =
      result.outcomes.empty() ? 0 : static_cast<std::uint32_t>(result.outcomes[0].per_qubit.size());
  out.write(reinterpret_cast<const char*>(&nq), sizeof nq);
  const std::uint64_t n = result.outcomes.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (const auto& ev : result.outcomes) {
    out.write(reinterpret_cast<const char*>(&ev.event_id), sizeof ev.event_id);
    const std::uint8_t sp = static_cast<std::uint8_t>(ev.species);
    out.write(reinterpret_cast<const char*>(&sp), sizeof sp);
    out.write(reinterpret_cast<const char*>(&ev.time_s), sizeof ev.time_s);
    for (const auto& qo : ev.per_qubit) {
      const double vals[6] = {qo.dq_raw_e,  qo.dq_aliased_e, qo.dq_measured_e,
                              qo.eps_phi,   qo.eps_theta,    qo.transient_energy_ec};
      out.write(reinterpret_cast<const char*>(vals), sizeof vals);
    }
  }
}

void write_pair_stats_csv(const RunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw numeric_error("cannot write " + path);
  out << "# qburst pair stats v1\n# manifest " << result.manifest_hash << "\n";
  out << "qubit_a,qubit_b,separation_um,n_cycles,p_obs_a,se_a,p_obs_b,se_b,p_obs_ab,se_ab,"
         "p_ab,se_p_ab,p_corr,se_p_corr,asym_1324,asym_1324_se,asym_1324_n\n";
  char buf[512];
  for (const auto& ps : result.pairs) {
    const auto& s = ps.stats;
    const double a13 = ps.asym_1324 ? ps.asym_1324->value : std::nan("");
    const double a13se = ps.asym_1324 ? ps.asym_1324->se : std::nan("");
    const std::uint64_t a13n = ps.asym_1324 ? ps.asym_1324->count : 0;
    std::snprintf(buf, sizeof buf,
                  "%s,%s,%.6g,%llu,%.9g,%.3g,%.9g,%.3g,%.9g,%.3g,%.9g,%.3g,%.9g,%.3g,%.9g,%.3g,%llu\n",
                  s.qubit_a.c_str(), s.qubit_b.c_str(), s.separation_um,
                  static_cast<unsigned long long>(s.n_cycles), s.p_obs_a, s.se_p_obs_a, s.p_obs_b,
                  s.se_p_obs_b, s.p_obs_ab, s.se_p_obs_ab, s.p_ab, s.se_p_ab, s.p_corr,
                  s.se_p_corr, a13, a13se, static_cast<unsigned long long>(a13n));
    out << buf;
  }
}

void write_exceedance_csv(const RunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw numeric_error("cannot write " + path);
  out << "# qburst exceedance v1\n# manifest " << result.manifest_hash << "\n";
  out << "qubit_a,qubit_b,separation_um,error,level,fraction,se\n";
  char buf[256];
  for (const auto& pe : result.errors.pairs) {
    for (const auto& [kind, curve] : {std::pair<const char*, const std::vector<ExceedancePoint>&>{
                                          "phase", pe.phase},
                                      {"bit", pe.bit}}) {
      for (const auto& pt : curve) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.6g,%s,%.9g,%.9g,%.3g\n", pe.qubit_a.c_str(),
                      pe.qubit_b.c_str(), pe.separation_um, kind, pt.level, pt.fraction, pt.se);
        out << buf;
      }
    }
  }
}

void write_joint_hist_csv(const RunResult& result, const SimulationConfig& config,
                          const std::string& dir) {
  for (const auto& ps : result.pairs) {
    const int qa = config.layout.qubit_index(ps.stats.qubit_a);
    const int qb = config.layout.qubit_index(ps.stats.qubit_b);
    const JointHistogram h = joint_histogram(result.jumps, qa, qb);
    std::ofstream out(dir + "/joint_" + ps.stats.qubit_a + "_" + ps.stats.qubit_b + ".csv");
    out << "# qburst joint histogram v1\n# manifest " << result.manifest_hash << "\n";
    out << "# bin_e " << h.bin_e << "\n";
    for (int ib = 0; ib < h.bins; ++ib) {
      for (int ia = 0; ia < h.bins; ++ia) {
        out << h.at(ia, ib);
        out << (ia + 1 < h.bins ? ',' : '\n');
      }
    }
  }
}

void write_report_txt(const RunResult& result, const SimulationConfig& config,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw numeric_error("cannot write " + path);
  out << "qburst run report\n";
  out << "manifest " << result.manifest_hash << "\n";
  out << "events " << result.outcomes.size() << " (seed " << config.run.seed << ")\n";
  out << "mode " << (config.run.mode == RunMode::events ? "events" : "series");
  if (config.run.mode == RunMode::series) out << ", cycles " << result.n_cycles;
  out << "\n\n";
  out << "pair statistics (threshold " << config.run.jump_threshold_e << " e):\n";
  char buf[256];
  for (const auto& ps : result.pairs) {
    const auto& s = ps.stats;
    std::snprintf(buf, sizeof buf,
                  "  %s-%s  %7.1f um  p_obs=(%.4f, %.4f)  p_obs_ab=%.4f  p_ab=%.4f  "
                  "p_corr=%.3f +- %.3f\n",
                  s.qubit_a.c_str(), s.qubit_b.c_str(), s.separation_um, s.p_obs_a, s.p_obs_b,
                  s.p_obs_ab, s.p_ab, s.p_corr, s.se_p_corr);
    out << buf;
  }
  if (result.charge_asym) {
    std::snprintf(buf, sizeof buf, "\ncharge asymmetry %.4f +- %.4f over %llu jumps\n",
                  result.charge_asym->value, result.charge_asym->se,
                  static_cast<unsigned long long>(result.charge_asym->count));
    out << buf;
  }
  for (const auto& ps : result.pairs) {
    if (!ps.asym_1324) continue;
    std::snprintf(buf, sizeof buf, "13/24 asymmetry %s-%s: %.4f +- %.4f (%llu joint jumps)\n",
                  ps.stats.qubit_a.c_str(), ps.stats.qubit_b.c_str(), ps.asym_1324->value,
                  ps.asym_1324->se, static_cast<unsigned long long>(ps.asym_1324->count));
    out << buf;
  }
  if (!result.rates.per_qubit.empty()) {
    out << "\nrates (cycle " << result.rates.cycle_s << " s):\n";
    for (const auto& r : result.rates.per_qubit) {
      std::snprintf(buf, sizeof buf, "  %s: %.4g Hz +- %.2g (%llu jumps)\n", r.qubit.c_str(),
                    r.rate_hz, r.se_hz, static_cast<unsigned long long>(r.jumps));
      out << buf;
    }
    for (const auto& r : result.rates.per_pair) {
      std::snprintf(buf, sizeof buf, "  %s-%s: %.4g Hz +- %.2g (corrected joint)\n",
                    r.qubit_a.c_str(), r.qubit_b.c_str(), r.rate_hz, r.se_hz);
      out << buf;
    }
  }
}

void write_manifest(const RunResult& result, const SimulationConfig& config,
                    const std::string& path) {
  nlohmann::json j;
  j["manifest"] = result.manifest_hash;
  j["seed"] = config.run.seed;
  j["version"] = "0.1.0";
  j["n_events"] = result.outcomes.size();
  j["wall_seconds"] = result.wall_seconds;
  j["mode"] = config.run.mode == RunMode::events ? "events" : "series";
  j["transport_mode"] = config.run.transport_mode == TransportMode::direct ? "direct" : "pdf";
  std::ofstream out(path);
  if (!out) throw numeric_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

void write_run_artifacts(const RunResult& result, const SimulationConfig& config,
                         const std::string& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream ev(out_dir + "/events.jsonl");
    if (!ev) throw numeric_error("cannot write events.jsonl");
    write_events_jsonl(ev, result.events);
  }
  write_outcomes_csv(result, config, out_dir + "/outcomes.csv");
  write_outcomes_bin(result, out_dir + "/outcomes.bin");
  write_pair_stats_csv(result, out_dir + "/pair_stats.csv");
  write_exceedance_csv(result, out_dir + "/exceedance.csv");
  write_joint_hist_csv(result, config, out_dir);
  write_report_txt(result, config, out_dir + "/report.txt");
  write_manifest(result, config, out_dir + "/manifest.json");
}

const std::vector<ScanTarget>& default_scan_targets() {
  static const std::vector<ScanTarget> targets{
      {340.0, 0.54, 0.04}, {640.0, 0.46, 0.04}, {3195.0, 0.0, 0.02}};
  return targets;
}

ScanResult parameter_scan(const SimulationConfig& config, const std::vector<double>& lambdas_um,
                          const std::vector<double>& efficiencies,
                          const std::vector<ScanTarget>& targets) {
  if (lambdas_um.empty() || efficiencies.empty()) {
    throw std::invalid_argument("parameter_scan: empty grid");
  }
  ScanResult scan;
  double best_score = std::numeric_limits<double>::infinity();
  for (double lambda : lambdas_um) {
    for (double fq : efficiencies) {
      SimulationConfig point = config;
      point.transport.lambda_trap_um = lambda;
      point.transport.charge_efficiency = fq;
      point.run.transport_mode = TransportMode::direct;  // tables depend on lambda
      const RunResult run = run_simulation(point);

      ScanRow row;
      row.lambda_trap_um = lambda;
      row.charge_efficiency = fq;
      row.pairs = run.pairs;
      row.charge_asym = run.charge_asym;
      double score = 0;
      for (const auto& target : targets) {
        const PairSummary* closest = nullptr;
        double best_gap = std::numeric_limits<double>::infinity();
        for (const auto& ps : run.pairs) {
          const double gap = std::abs(ps.stats.separation_um - target.separation_um);
          if (gap < best_gap) {
            best_gap = gap;
            closest = &ps;
          }
        }
        if (closest) {
          const double z = (closest->stats.p_corr - target.value) / target.scale;
          score += z * z;
        }
      }
      row.score = score;
      if (score < best_score) {
        best_score = score;
        scan.best_index = static_cast<int>(scan.rows.size());
      }
      scan.rows.push_back(std::move(row));
    }
  }
  if (scan.best_index >= 0) scan.rows[scan.best_index].best = true;
  return scan;
}

void write_scan_csv(const ScanResult& scan, const SimulationConfig& config,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw numeric_error("cannot write " + path);
  out << "# qburst scan v1\n# manifest " << config.config_hash_hex() << "\n";
  out << "lambda_trap_um,charge_efficiency,score,best";
  if (!scan.rows.empty()) {
    for (const auto& ps : scan.rows[0].pairs) {
      out << ",p_corr_" << ps.stats.qubit_a << "_" << ps.stats.qubit_b;
    }
  }
  out << ",charge_asym\n";
  for (const auto& row : scan.rows) {
    out << row.lambda_trap_um << "," << row.charge_efficiency << "," << row.score << ","
        << (row.best ? 1 : 0);
    for (const auto& ps : row.pairs) out << "," << ps.stats.p_corr;
    out << "," << (row.charge_asym ? row.charge_asym->value : std::nan("")) << "\n";
  }
}

namespace {

std::string read_manifest_line(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw numeric_error("plot: cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# manifest ", 0) == 0) return line.substr(11);
    if (!line.empty() && line[0] != '#') break;
  }
  throw numeric_error("plot: no manifest header in " + path);
}

}  // namespace

void plot_run_artifacts(const std::string& out_dir) {
  const std::string outcomes_path = out_dir + "/outcomes.csv";
  const std::string pair_path = out_dir + "/pair_stats.csv";
  const std::string exc_path = out_dir + "/exceedance.csv";
  const std::string h_outcomes = read_manifest_line(outcomes_path);
  if (read_manifest_line(pair_path) != h_outcomes || read_manifest_line(exc_path) != h_outcomes) {
    throw numeric_error("plot: input files carry different manifest hashes; refusing to mix runs");
  }

  // per-qubit measured-charge histograms and per-pair scatter
  std::ifstream in(outcomes_path);
  std::string line;
  std::map<std::string, std::vector<double>> dq_by_qubit;
  std::map<std::string, std::vector<std::pair<double, double>>> scatter;  // by pair key
  std::map<std::uint64_t, std::map<std::string, double>> by_event;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("event_id", 0) == 0) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ls, tok, ',')) cols.push_back(tok);
    if (cols.size() < 10) continue;
    const std::uint64_t id = std::stoull(cols[0]);
    const std::string qubit = cols[3];
    const double dq = std::stod(cols[6]);
    dq_by_qubit[qubit].push_back(dq);
    by_event[id][qubit] = dq;
  }
  for (const auto& [qubit, values] : dq_by_qubit) {
    svg::Histogram h;
    h.title = "measured charge jumps, " + qubit;
    h.x_label = "dq (e)";
    h.lo = -0.5;
    h.hi = 0.5;
    h.bins = 50;
    h.log_y = true;
    h.values = values;
    svg::write_histogram(out_dir + "/charge_hist_" + qubit + ".svg", h);
  }
  std::vector<std::string> qubits;
  for (const auto& [qubit, values] : dq_by_qubit) qubits.push_back(qubit);
  for (std::size_t a = 0; a < qubits.size(); ++a) {
    for (std::size_t b = a + 1; b < qubits.size(); ++b) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& [id, m] : by_event) {
        const auto ia = m.find(qubits[a]);
        const auto ib = m.find(qubits[b]);
        if (ia != m.end() && ib != m.end()) pts.emplace_back(ia->second, ib->second);
      }
      svg::Scatter sc;
      sc.title = "joint charge, " + qubits[a] + " vs " + qubits[b];
      sc.x_label = qubits[a] + " dq (e)";
      sc.y_label = qubits[b] + " dq (e)";
      sc.x_lo = sc.y_lo = -0.5;
      sc.x_hi = sc.y_hi = 0.5;
      sc.points = std::move(pts);
      svg::write_scatter(out_dir + "/joint_" + qubits[a] + "_" + qubits[b] + ".svg", sc);
    }
  }

  // exceedance curves
  std::ifstream exc(exc_path);
  std::map<std::string, svg::Curves> curves;  // error kind -> plot
  while (std::getline(exc, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("qubit_a", 0) == 0) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ls, tok, ',')) cols.push_back(tok);
    if (cols.size() < 7) continue;
    const std::string kind = cols[3];
    const std::string label = cols[0] + "-" + cols[1] + " (" + cols[2] + " um)";
    auto& plot = curves[kind];
    plot.title = "joint " + kind + "-flip exceedance";
    plot.x_label = "error level";
    plot.y_label = "fraction of events";
    plot.log_x = true;
    plot.series[label].emplace_back(std::stod(cols[4]), std::stod(cols[5]));
  }
  for (auto& [kind, plot] : curves) {
    svg::write_curves(out_dir + "/exceedance_" + kind + ".svg", plot);
  }
}

}  // namespace qburst
