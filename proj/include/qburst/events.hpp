#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qburst/geometry.hpp"
#include "qburst/rng.hpp"

namespace qburst {

enum class Species : std::uint8_t { gamma = 0, muon = 1 };

const char* species_name(Species s);

struct TrackSegment {
  Vec3 start;
  Vec3 end;
  double energy_ev = 0.0;

  Vec3 midpoint() const { return (start + end) * 0.5; }
  double length_um() const { return (end - start).norm(); }
};

struct ImpactEvent {
  std::uint64_t event_id = 0;
  Species species = Species::gamma;
  double time_s = 0.0;
  std::vector<TrackSegment> segments;

  double total_energy_ev() const;
};

// Energy PDF for gamma deposits: either a truncated exponential or a
// tabulated two-column (energy_ev, density) spectrum.
class GammaSpectrum {
 public:
  static GammaSpectrum exponential(double mean_ev, double max_ev);
  static GammaSpectrum from_points(std::vector<std::pair<double, double>> points);
  static GammaSpectrum from_table_file(const std::string& path);

  double sample(RngStream& rng) const;
  double mean_ev() const;
  bool is_tabulated() const { return tabulated_; }
  std::string describe() const;

 private:
  bool tabulated_ = false;
  double mean_ = 1e5;
  double max_ = 1e6;
  // tabulated form: piecewise-linear density over nodes
  std::vector<double> energy_, density_, cdf_;
};

struct SourceSpec {
  double gamma_rate_hz = 19.8e-3;
  double muon_rate_hz = 0.5e-3;
  GammaSpectrum gamma_spectrum = GammaSpectrum::exponential(100e3, 1e6);
  double gamma_segment_length_um = 0.0;  // 0 = point-like deposits
  // Muon events deposit through the primary chord plus a Poisson number of
  // satellite deposits from shower gammas made in the surrounding hardware;
  // the satellites land anywhere on the chip, so one muon event can touch
  // widely separated qubits. dE/dx and the satellite mean are calibrated
  // together so the mean total deposit lands at 460 keV.
  double muon_dedx_ev_um = 734.0;
  double muon_dedx_sigma = 0.25;       // log-normal spread, unit mean
  double muon_zenith_exponent = 2.0;   // density ~ cos^n(theta)
  double muon_segment_step_um = 25.0;
  double muon_secondary_mean = 0.7;    // satellite deposits per muon event
  std::uint64_t rng_seed = 1;

  void validate() const;
};

// Stream ids are derived from (rng_seed, event_id), so any event can be
// regenerated independently of execution order.
ImpactEvent sample_gamma(const SourceSpec& spec, const Substrate& substrate,
                         std::uint64_t event_id, RngStream& rng);
ImpactEvent sample_muon(const SourceSpec& spec, const Substrate& substrate,
                        std::uint64_t event_id, RngStream& rng);

// Either exactly n_events, or Poisson arrivals until duration_s elapses.
std::vector<ImpactEvent> sample_event_stream(const SourceSpec& spec, const Substrate& substrate,
                                             std::uint64_t n_events);
std::vector<ImpactEvent> sample_event_stream_for(const SourceSpec& spec,
                                                 const Substrate& substrate, double duration_s);

// One JSON record per line; replayable.
void write_events_jsonl(std::ostream& out, const std::vector<ImpactEvent>& events);
std::vector<ImpactEvent> read_events_jsonl(std::istream& in);

}  // namespace qburst
