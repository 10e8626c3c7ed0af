#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qburst/induced.hpp"

namespace qburst {

// One row of the jump table: event-mode uses one record per impact event,
// series-mode one record per measurement cycle.
struct JumpRecord {
  std::uint64_t cycle_id = 0;
  std::vector<double> dq;          // per qubit, aliased + noisy
  std::vector<std::uint8_t> jump;  // threshold < |dq| <= 0.5
};

// Jump rule: strictly above threshold, and within the aliasing interval.
std::vector<JumpRecord> detect_jumps(const std::vector<EventOutcome>& outcomes,
                                     double threshold_e = 0.1);

struct CycleRecord {
  std::uint64_t cycle_id = 0;
  std::vector<double> dq;
};

// Series mode: Poisson-timed events are binned into fixed cycles, aliased
// charges summed within each cycle, fresh readout noise applied per cycle.
std::vector<CycleRecord> bin_into_cycles(const std::vector<EventOutcome>& outcomes,
                                         std::size_t n_qubits, double cycle_s, double duration_s,
                                         double sigma_q_e, std::uint64_t seed);
std::vector<JumpRecord> detect_jumps_cycles(const std::vector<CycleRecord>& cycles,
                                            double threshold_e = 0.1);

// Random-coincidence corrected joint probability,
// p_AB = (pab - pa pb) / (1 + pab - (pa + pb)), floored at zero.
double corrected_joint_probability(double p_obs_a, double p_obs_b, double p_obs_ab);

// p_corr = 2 p_AB / (pa + pb), clamped to [0, 1].
double correlation_probability(double p_ab, double p_obs_a, double p_obs_b);

struct PairStats {
  std::string qubit_a, qubit_b;
  double separation_um = 0;
  double p_obs_a = 0, p_obs_b = 0, p_obs_ab = 0;
  double p_ab = 0;
  double p_corr = 0;
  double se_p_obs_a = 0, se_p_obs_b = 0, se_p_obs_ab = 0;
  double se_p_ab = 0, se_p_corr = 0;
  std::uint64_t n_cycles = 0;
};

PairStats pair_stats(const std::vector<JumpRecord>& jumps, int qa, int qb,
                     const std::string& name_a, const std::string& name_b, double separation_um);

struct Asymmetry {
  double value = 0;
  double se = 0;
  std::uint64_t count = 0;
};

// Positive-jump fraction over all qubits; nullopt when there are no jumps.
std::optional<Asymmetry> charge_asymmetry(const std::vector<JumpRecord>& jumps);

// Same-sign excess of joint jumps, (N1 + N3 - N2 - N4) / total over the
// sign quadrants; nullopt when the pair never jumped together.
std::optional<Asymmetry> asymmetry_1324(const std::vector<JumpRecord>& jumps, int qa, int qb);

struct QubitRate {
  std::string qubit;
  double rate_hz = 0;
  double se_hz = 0;
  double upper95_hz = 0;  // reported when the count is zero
  std::uint64_t jumps = 0;
};

struct PairRate {
  std::string qubit_a, qubit_b;
  double rate_hz = 0;  // corrected joint rate p_AB / cycle_time
  double se_hz = 0;
};

struct RatesReport {
  std::vector<QubitRate> per_qubit;
  std::vector<PairRate> per_pair;
  double cycle_s = 0;
  std::uint64_t n_cycles = 0;
};

RatesReport rates_report(const std::vector<JumpRecord>& jumps,
                         const std::vector<std::string>& qubit_names,
                         const std::vector<std::pair<int, int>>& pairs, double cycle_s);

// 2D histogram of joint jumps for plotting/dumps.
struct JointHistogram {
  double bin_e = 0.02;
  int bins = 50;  // covers [-0.5, 0.5)
  std::vector<std::uint32_t> counts;
  std::uint32_t& at(int ia, int ib) { return counts[static_cast<std::size_t>(ib) * bins + ia]; }
  std::uint32_t at(int ia, int ib) const { return counts[static_cast<std::size_t>(ib) * bins + ia]; }
};

JointHistogram joint_histogram(const std::vector<JumpRecord>& jumps, int qa, int qb,
                               double bin_e = 0.02);

}  // namespace qburst
