#include "qburst/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qburst {

using nlohmann::json;

config_error::config_error(std::vector<std::string> issues)
    : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

std::string config_error::join(const std::vector<std::string>& issues) {
  std::ostringstream os;
  os << "invalid configuration (" << issues.size() << " issue" << (issues.size() == 1 ? "" : "s")
     << "):";
  for (const auto& i : issues) os << "\n  - " << i;
  return os.str();
}

void SimulationConfig::validate() const {
  std::vector<std::string> issues;
  const auto probe = [&issues](const char* path, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      issues.push_back(std::string(path) + ": " + e.what());
    }
  };
  probe("layout", [&] { layout.validate(); });
  probe("source", [&] { source.validate(); });
  probe("transport", [&] { transport.validate(); });
  probe("transmon", [&] { transmon.validate(); });
  probe("recovery", [&] { recovery.validate(); });
  if (measurement.sigma_q_e < 0) issues.push_back("measurement.sigma_q_e: must be >= 0");
  if (measurement.ramsey_offset - 0.5 * measurement.ramsey_contrast < -1e-12 ||
      measurement.ramsey_offset + 0.5 * measurement.ramsey_contrast > 1.0 + 1e-12) {
    issues.push_back("measurement: ramsey contrast/offset leave the [0,1] band");
  }
  if (!(run.cycle_time_s > 0)) issues.push_back("run.cycle_time_s: must be > 0");
  if (!(run.jump_threshold_e > 0) || run.jump_threshold_e > 0.5) {
    issues.push_back("run.jump_threshold_e: must be in (0, 0.5]");
  }
  if (run.mode == RunMode::series && run.n_events == 0 && !(run.duration_s > 0)) {
    issues.push_back("run: series mode needs n_events or duration_s");
  }
  if (run.workers < 0) issues.push_back("run.workers: must be >= 0");
  if (run.pdf_samples_per_bin < 10000 && run.transport_mode == TransportMode::pdf) {
    issues.push_back("run.pdf_samples_per_bin: must be >= 1e4 in pdf mode");
  }
  if (!(grid.tolerance > 0)) issues.push_back("grid.tolerance: must be > 0");
  if (grid.max_iterations < 1) issues.push_back("grid.max_iterations: must be >= 1");
  if (!issues.empty()) throw config_error(std::move(issues));
}

namespace {

void append(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g|", v);
  s += buf;
}

}  // namespace

std::string SimulationConfig::canonical_string() const {
  std::string s = "qburst-config-v1|";
  append(s, layout.substrate.side_x_um);
  append(s, layout.substrate.side_y_um);
  append(s, layout.substrate.thickness_um);
  append(s, layout.substrate.relative_permittivity);
  append(s, layout.substrate.sound_speed_m_s);
  append(s, layout.anchor_fraction);
  for (const auto& q : layout.qubits) {
    s += q.id + "|";
    append(s, q.center_x_um);
    append(s, q.center_y_um);
    append(s, q.island_radius_um);
    append(s, q.cavity_radius_um);
    append(s, q.charging_energy_hz);
    append(s, q.josephson_energy_hz);
    append(s, q.omega01_rad_s);
  }
  append(s, source.gamma_rate_hz);
  append(s, source.muon_rate_hz);
  s += source.gamma_spectrum.describe() + "|";
  append(s, source.gamma_segment_length_um);
  append(s, source.muon_dedx_ev_um);
  append(s, source.muon_dedx_sigma);
  append(s, source.muon_zenith_exponent);
  append(s, source.muon_segment_step_um);
  append(s, static_cast<double>(source.rng_seed));
  append(s, transport.lambda_trap_um);
  append(s, transport.charge_efficiency);
  append(s, transport.pair_energy_ev);
  append(s, transport.valley_spread_rad);
  append(s, transport.max_pairs_per_event);
  append(s, grid.core_spacing_um);
  append(s, grid.core_radius_um);
  append(s, grid.stretch_ratio);
  append(s, grid.half_width_um);
  append(s, grid.dz_substrate_um);
  append(s, grid.vacuum_above_um);
  append(s, grid.vacuum_below_um);
  append(s, grid.z_stretch_ratio);
  append(s, grid.tolerance);
  append(s, grid.max_iterations);
  append(s, grid.omega);
  append(s, static_cast<double>(static_cast<int>(grid.lateral_bc)));
  append(s, measurement.sigma_q_e);
  append(s, measurement.ramsey_contrast);
  append(s, measurement.ramsey_offset);
  append(s, measurement.noise_in_errors ? 1.0 : 0.0);
  append(s, transmon.charging_energy_hz);
  append(s, transmon.ej_over_ec);
  append(s, transmon.omega01_rad_s);
  append(s, transmon.cycle_time_s);
  append(s, transmon.theta_cap);
  append(s, transmon.quadrature_sum ? 1.0 : 0.0);
  append(s, recovery.tau_s);
  append(s, recovery.sigma_s);
  append(s, recovery.gap_ev);
  append(s, recovery.omega01_rad_s);
  append(s, static_cast<double>(run.n_events));
  append(s, run.duration_s);
  append(s, run.cycle_time_s);
  append(s, static_cast<double>(run.seed));
  append(s, static_cast<double>(static_cast<int>(run.mode)));
  append(s, static_cast<double>(static_cast<int>(run.transport_mode)));
  append(s, static_cast<double>(run.pdf_samples_per_bin));
  append(s, run.jump_threshold_e);
  append(s, static_cast<double>(static_cast<int>(joint_rule)));
  return s;
}

std::uint64_t SimulationConfig::config_hash() const {
  const std::string s = canonical_string();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string SimulationConfig::config_hash_hex() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash()));
  return buf;
}

namespace {

double num(const json& j, const char* key, double fallback, std::vector<std::string>& issues,
           const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    issues.push_back(path + "." + key + ": must be a number");
    return fallback;
  }
  return j[key].get<double>();
}

}  // namespace

SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error({"cannot open config file " + path});
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error({std::string("config parse error: ") + e.what()});
  }

  SimulationConfig cfg;
  std::vector<std::string> issues;

  if (j.contains("layout")) {
    const auto& jl = j["layout"];
    if (jl.is_string() && jl.get<std::string>() != "default") {
      cfg.layout_file = jl.get<std::string>();
      try {
        cfg.layout = load_layout(cfg.layout_file);
      } catch (const std::exception& e) {
        issues.push_back(std::string("layout: ") + e.what());
      }
    }
  }
  if (j.contains("source")) {
    const auto& js = j["source"];
    cfg.source.gamma_rate_hz = num(js, "gamma_rate_hz", cfg.source.gamma_rate_hz, issues, "source");
    cfg.source.muon_rate_hz = num(js, "muon_rate_hz", cfg.source.muon_rate_hz, issues, "source");
    cfg.source.gamma_segment_length_um =
        num(js, "gamma_segment_length_um", cfg.source.gamma_segment_length_um, issues, "source");
    cfg.source.muon_dedx_ev_um = num(js, "muon_dedx_ev_um", cfg.source.muon_dedx_ev_um, issues, "source");
    cfg.source.muon_dedx_sigma = num(js, "muon_dedx_sigma", cfg.source.muon_dedx_sigma, issues, "source");
    cfg.source.muon_zenith_exponent =
        num(js, "muon_zenith_exponent", cfg.source.muon_zenith_exponent, issues, "source");
    cfg.source.muon_segment_step_um =
        num(js, "muon_segment_step_um", cfg.source.muon_segment_step_um, issues, "source");
    if (js.contains("gamma_spectrum")) {
      const auto& sp = js["gamma_spectrum"];
      const std::string type = sp.value("type", "exponential");
      try {
        if (type == "exponential") {
          cfg.source.gamma_spectrum = GammaSpectrum::exponential(
              sp.value("mean_ev", 1e5), sp.value("max_ev", 1e6));
        } else if (type == "table") {
          cfg.source.gamma_spectrum = GammaSpectrum::from_table_file(sp.at("file").get<std::string>());
        } else {
          issues.push_back("source.gamma_spectrum.type: unknown type " + type);
        }
      } catch (const std::exception& e) {
        issues.push_back(std::string("source.gamma_spectrum: ") + e.what());
      }
    }
  }
  if (j.contains("transport")) {
    const auto& jt = j["transport"];
    cfg.transport.lambda_trap_um = num(jt, "lambda_trap_um", cfg.transport.lambda_trap_um, issues, "transport");
    cfg.transport.charge_efficiency =
        num(jt, "charge_efficiency", cfg.transport.charge_efficiency, issues, "transport");
    cfg.transport.pair_energy_ev = num(jt, "pair_energy_ev", cfg.transport.pair_energy_ev, issues, "transport");
    if (jt.contains("valley_spread_deg")) {
      cfg.transport.valley_spread_rad =
          num(jt, "valley_spread_deg", 15.0, issues, "transport") * M_PI / 180.0;
    }
    cfg.transport.max_pairs_per_event = static_cast<int>(
        num(jt, "max_pairs_per_event", cfg.transport.max_pairs_per_event, issues, "transport"));
  }
  if (j.contains("grid")) {
    const auto& jg = j["grid"];
    cfg.grid.core_spacing_um = num(jg, "core_spacing_um", cfg.grid.core_spacing_um, issues, "grid");
    cfg.grid.core_radius_um = num(jg, "core_radius_um", cfg.grid.core_radius_um, issues, "grid");
    cfg.grid.stretch_ratio = num(jg, "stretch_ratio", cfg.grid.stretch_ratio, issues, "grid");
    cfg.grid.half_width_um = num(jg, "half_width_um", cfg.grid.half_width_um, issues, "grid");
    cfg.grid.dz_substrate_um = num(jg, "dz_substrate_um", cfg.grid.dz_substrate_um, issues, "grid");
    cfg.grid.vacuum_above_um = num(jg, "vacuum_above_um", cfg.grid.vacuum_above_um, issues, "grid");
    cfg.grid.vacuum_below_um = num(jg, "vacuum_below_um", cfg.grid.vacuum_below_um, issues, "grid");
    cfg.grid.z_stretch_ratio = num(jg, "z_stretch_ratio", cfg.grid.z_stretch_ratio, issues, "grid");
    cfg.grid.tolerance = num(jg, "tolerance", cfg.grid.tolerance, issues, "grid");
    cfg.grid.max_iterations =
        static_cast<int>(num(jg, "max_iterations", cfg.grid.max_iterations, issues, "grid"));
    cfg.grid.omega = num(jg, "omega", cfg.grid.omega, issues, "grid");
  }
  if (j.contains("measurement")) {
    const auto& jm = j["measurement"];
    cfg.measurement.sigma_q_e = num(jm, "sigma_q_e", cfg.measurement.sigma_q_e, issues, "measurement");
    cfg.measurement.ramsey_contrast =
        num(jm, "ramsey_contrast", cfg.measurement.ramsey_contrast, issues, "measurement");
    cfg.measurement.ramsey_offset =
        num(jm, "ramsey_offset", cfg.measurement.ramsey_offset, issues, "measurement");
    if (jm.contains("noise_in_errors")) {
      cfg.measurement.noise_in_errors = jm["noise_in_errors"].get<bool>();
    }
  }
  if (j.contains("transmon")) {
    const auto& jt = j["transmon"];
    cfg.transmon.charging_energy_hz =
        num(jt, "charging_energy_hz", cfg.transmon.charging_energy_hz, issues, "transmon");
    cfg.transmon.ej_over_ec = num(jt, "ej_over_ec", cfg.transmon.ej_over_ec, issues, "transmon");
    if (jt.contains("omega01_hz")) {
      cfg.transmon.omega01_rad_s = 2.0 * M_PI * num(jt, "omega01_hz", 5e9, issues, "transmon");
    }
    cfg.transmon.cycle_time_s = num(jt, "cycle_time_s", cfg.transmon.cycle_time_s, issues, "transmon");
    cfg.transmon.theta_cap = num(jt, "theta_cap", cfg.transmon.theta_cap, issues, "transmon");
    if (jt.contains("quadrature_sum")) cfg.transmon.quadrature_sum = jt["quadrature_sum"].get<bool>();
    if (jt.contains("joint_rule")) {
      const std::string rule = jt["joint_rule"].get<std::string>();
      if (rule == "min") {
        cfg.joint_rule = JointRule::min_rule;
      } else if (rule == "geometric_mean") {
        cfg.joint_rule = JointRule::geometric_mean;
      } else {
        issues.push_back("transmon.joint_rule: unknown rule " + rule);
      }
    }
  }
  if (j.contains("recovery")) {
    const auto& jr = j["recovery"];
    cfg.recovery.tau_s = num(jr, "tau_s", cfg.recovery.tau_s, issues, "recovery");
    cfg.recovery.sigma_s = num(jr, "sigma_s", cfg.recovery.sigma_s, issues, "recovery");
    cfg.recovery.gap_ev = num(jr, "gap_ev", cfg.recovery.gap_ev, issues, "recovery");
    if (jr.contains("omega01_hz")) {
      cfg.recovery.omega01_rad_s = 2.0 * M_PI * num(jr, "omega01_hz", 4.5e9, issues, "recovery");
    }
  }
  if (j.contains("run")) {
    const auto& jr = j["run"];
    cfg.run.n_events = static_cast<std::uint64_t>(num(jr, "n_events", cfg.run.n_events, issues, "run"));
    cfg.run.duration_s = num(jr, "duration_s", cfg.run.duration_s, issues, "run");
    cfg.run.cycle_time_s = num(jr, "cycle_time_s", cfg.run.cycle_time_s, issues, "run");
    cfg.run.seed = static_cast<std::uint64_t>(num(jr, "seed", cfg.run.seed, issues, "run"));
    cfg.run.workers = static_cast<int>(num(jr, "workers", cfg.run.workers, issues, "run"));
    cfg.run.out_dir = jr.value("out_dir", cfg.run.out_dir);
    cfg.run.cache_dir = jr.value("cache_dir", cfg.run.cache_dir);
    if (jr.contains("mode")) {
      const std::string m = jr["mode"].get<std::string>();
      if (m == "events") {
        cfg.run.mode = RunMode::events;
      } else if (m == "series") {
        cfg.run.mode = RunMode::series;
      } else {
        issues.push_back("run.mode: unknown mode " + m);
      }
    }
    if (jr.contains("transport_mode")) {
      const std::string m = jr["transport_mode"].get<std::string>();
      if (m == "direct") {
        cfg.run.transport_mode = TransportMode::direct;
      } else if (m == "pdf") {
        cfg.run.transport_mode = TransportMode::pdf;
      } else {
        issues.push_back("run.transport_mode: unknown mode " + m);
      }
    }
    cfg.run.pdf_samples_per_bin = static_cast<std::uint64_t>(
        num(jr, "pdf_samples_per_bin", cfg.run.pdf_samples_per_bin, issues, "run"));
    cfg.run.jump_threshold_e = num(jr, "jump_threshold_e", cfg.run.jump_threshold_e, issues, "run");
  }
  cfg.source.rng_seed = cfg.run.seed;

  if (!issues.empty()) throw config_error(std::move(issues));
  cfg.validate();
  return cfg;
}

void save_config(const SimulationConfig& cfg, const std::string& path) {
  json j;
  j["layout"] = cfg.layout_file.empty() ? "default" : cfg.layout_file;
  j["source"] = {{"gamma_rate_hz", cfg.source.gamma_rate_hz},
                 {"muon_rate_hz", cfg.source.muon_rate_hz},
                 {"gamma_segment_length_um", cfg.source.gamma_segment_length_um},
                 {"muon_dedx_ev_um", cfg.source.muon_dedx_ev_um},
                 {"muon_dedx_sigma", cfg.source.muon_dedx_sigma},
                 {"muon_zenith_exponent", cfg.source.muon_zenith_exponent},
                 {"muon_segment_step_um", cfg.source.muon_segment_step_um}};
  j["transport"] = {{"lambda_trap_um", cfg.transport.lambda_trap_um},
                    {"charge_efficiency", cfg.transport.charge_efficiency},
                    {"pair_energy_ev", cfg.transport.pair_energy_ev},
                    {"valley_spread_deg", cfg.transport.valley_spread_rad * 180.0 / M_PI},
                    {"max_pairs_per_event", cfg.transport.max_pairs_per_event}};
  j["grid"] = {{"core_spacing_um", cfg.grid.core_spacing_um},
               {"core_radius_um", cfg.grid.core_radius_um},
               {"stretch_ratio", cfg.grid.stretch_ratio},
               {"half_width_um", cfg.grid.half_width_um},
               {"dz_substrate_um", cfg.grid.dz_substrate_um},
               {"vacuum_above_um", cfg.grid.vacuum_above_um},
               {"vacuum_below_um", cfg.grid.vacuum_below_um},
               {"z_stretch_ratio", cfg.grid.z_stretch_ratio},
               {"tolerance", cfg.grid.tolerance},
               {"max_iterations", cfg.grid.max_iterations},
               {"omega", cfg.grid.omega}};
  j["measurement"] = {{"sigma_q_e", cfg.measurement.sigma_q_e},
                      {"ramsey_contrast", cfg.measurement.ramsey_contrast},
                      {"ramsey_offset", cfg.measurement.ramsey_offset},
                      {"noise_in_errors", cfg.measurement.noise_in_errors}};
  j["transmon"] = {{"charging_energy_hz", cfg.transmon.charging_energy_hz},
                   {"ej_over_ec", cfg.transmon.ej_over_ec},
                   {"omega01_hz", cfg.transmon.omega01_rad_s / (2.0 * M_PI)},
                   {"cycle_time_s", cfg.transmon.cycle_time_s},
                   {"theta_cap", cfg.transmon.theta_cap},
                   {"quadrature_sum", cfg.transmon.quadrature_sum},
                   {"joint_rule", cfg.joint_rule == JointRule::min_rule ? "min" : "geometric_mean"}};
  j["recovery"] = {{"tau_s", cfg.recovery.tau_s},
                   {"sigma_s", cfg.recovery.sigma_s},
                   {"gap_ev", cfg.recovery.gap_ev},
                   {"omega01_hz", cfg.recovery.omega01_rad_s / (2.0 * M_PI)}};
  j["run"] = {{"n_events", cfg.run.n_events},
              {"duration_s", cfg.run.duration_s},
              {"cycle_time_s", cfg.run.cycle_time_s},
              {"seed", cfg.run.seed},
              {"workers", cfg.run.workers},
              {"out_dir", cfg.run.out_dir},
              {"cache_dir", cfg.run.cache_dir},
              {"mode", cfg.run.mode == RunMode::events ? "events" : "series"},
              {"transport_mode", cfg.run.transport_mode == TransportMode::direct ? "direct" : "pdf"},
              {"pdf_samples_per_bin", cfg.run.pdf_samples_per_bin},
              {"jump_threshold_e", cfg.run.jump_threshold_e}};
  std::ofstream out(path);
  if (!out) throw config_error({"cannot write config file " + path});
  out << j.dump(2) << "\n";
}

}  // namespace qburst
