#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qburst/errors.hpp"
#include "qburst/events.hpp"
#include "qburst/geometry.hpp"
#include "qburst/recovery.hpp"
#include "qburst/transport.hpp"
#include "qburst/weighting.hpp"

namespace qburst {

class config_error : public std::runtime_error {
 public:
  explicit config_error(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues);
  std::vector<std::string> issues_;
};

struct MeasurementConfig {
  double sigma_q_e = 0.02;  // readout charge noise
  double ramsey_contrast = 0.9;
  double ramsey_offset = 0.45;
  // Derive the error models from the noise-bearing reconstructed charge,
  // mirroring how the reference histograms were produced. Off = use the
  // physical (noiseless) induced charge.
  bool noise_in_errors = true;
};

enum class RunMode : std::uint8_t { events, series };
enum class TransportMode : std::uint8_t { direct, pdf };

struct RunConfig {
  std::uint64_t n_events = 10000;
  double duration_s = 0.0;  // series mode with n_events == 0
  double cycle_time_s = 44.0;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = all available
  std::string out_dir = "out";
  std::string cache_dir = "cache";
  RunMode mode = RunMode::events;
  TransportMode transport_mode = TransportMode::direct;
  std::uint64_t pdf_samples_per_bin = 200000;
  double jump_threshold_e = 0.1;
};

// Everything a run needs; defaults reproduce the headline statistics with
// no config file at all.
struct SimulationConfig {
  std::string layout_file;  // empty = built-in four-qubit layout
  ChipLayout layout = default_layout();
  SourceSpec source;
  TransportParams transport;
  GridSpec grid;
  MeasurementConfig measurement;
  TransmonParams transmon;
  RecoveryParams recovery;
  RunConfig run;
  JointRule joint_rule = JointRule::min_rule;

  void validate() const;  // throws config_error listing every violation with field paths
  std::string canonical_string() const;
  std::uint64_t config_hash() const;
  std::string config_hash_hex() const;
};

SimulationConfig load_config(const std::string& path);
void save_config(const SimulationConfig& config, const std::string& path);

}  // namespace qburst
