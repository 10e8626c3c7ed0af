#include "qburst/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qburst {

namespace {

bool is_jump(double dq, double threshold) {
  const double a = std::abs(dq);
  return a > threshold && a <= 0.5;
}

double binom_se(double p, std::uint64_t n) {
  return n > 0 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n)) : 0.0;
}

}  // namespace

std::vector<JumpRecord> detect_jumps(const std::vector<EventOutcome>& outcomes,
                                     double threshold_e) {
  if (!(threshold_e > 0) || threshold_e > 0.5) {
    throw std::invalid_argument("detect_jumps: threshold must be in (0, 0.5]");
  }
  std::vector<JumpRecord> records;
  records.reserve(outcomes.size());
  for (const auto& ev : outcomes) {
    JumpRecord rec;
    rec.cycle_id = ev.event_id;
    rec.dq.reserve(ev.per_qubit.size());
    rec.jump.reserve(ev.per_qubit.size());
    for (const auto& q : ev.per_qubit) {
      rec.dq.push_back(q.dq_measured_e);
      rec.jump.push_back(is_jump(q.dq_measured_e, threshold_e) ? 1 : 0);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<CycleRecord> bin_into_cycles(const std::vector<EventOutcome>& outcomes,
                                         std::size_t n_qubits, double cycle_s, double duration_s,
                                         double sigma_q_e, std::uint64_t seed) {
  if (!(cycle_s > 0)) throw std::invalid_argument("bin_into_cycles: cycle time must be > 0");
  double t_end = duration_s;
  for (const auto& ev : outcomes) t_end = std::max(t_end, ev.time_s);
  const std::uint64_t n_cycles = static_cast<std::uint64_t>(std::ceil(t_end / cycle_s)) + 1;

  std::vector<CycleRecord> cycles(n_cycles);
  for (std::uint64_t c = 0; c < n_cycles; ++c) {
    cycles[c].cycle_id = c;
    cycles[c].dq.assign(n_qubits, 0.0);
  }
  for (const auto& ev : outcomes) {
    const std::uint64_t c = static_cast<std::uint64_t>(ev.time_s / cycle_s);
    for (std::size_t q = 0; q < std::min(n_qubits, ev.per_qubit.size()); ++q) {
      cycles[c].dq[q] += ev.per_qubit[q].dq_aliased_e;
    }
  }
  for (std::uint64_t c = 0; c < n_cycles; ++c) {
    for (std::size_t q = 0; q < n_qubits; ++q) {
      RngStream rng(seed, c * n_qubits + q, rng_salt::cycle_noise);
      cycles[c].dq[q] = measure_charge(alias_charge(cycles[c].dq[q]), sigma_q_e, rng);
    }
  }
  return cycles;
}

std::vector<JumpRecord> detect_jumps_cycles(const std::vector<CycleRecord>& cycles,
                                            double threshold_e) {
  if (!(threshold_e > 0) || threshold_e > 0.5) {
    throw std::invalid_argument("detect_jumps_cycles: threshold must be in (0, 0.5]");
  }
  std::vector<JumpRecord> records;
  records.reserve(cycles.size());
  for (const auto& c : cycles) {
    JumpRecord rec;
    rec.cycle_id = c.cycle_id;
    rec.dq = c.dq;
    for (double dq : c.dq) rec.jump.push_back(is_jump(dq, threshold_e) ? 1 : 0);
    records.push_back(std::move(rec));
  }
  return records;
}

double corrected_joint_probability(double p_obs_a, double p_obs_b, double p_obs_ab) {
  for (double p : {p_obs_a, p_obs_b, p_obs_ab}) {
    if (p < 0 || p > 1) throw std::invalid_argument("corrected_joint_probability: p not in [0,1]");
  }
  const double den = 1.0 + p_obs_ab - (p_obs_a + p_obs_b);
  if (!(den > 0)) {
    throw std::invalid_argument("corrected_joint_probability: non-positive denominator");
  }
  return std::max(0.0, (p_obs_ab - p_obs_a * p_obs_b) / den);
}

double correlation_probability(double p_ab, double p_obs_a, double p_obs_b) {
  const double den = p_obs_a + p_obs_b;
  if (!(den > 0)) throw std::invalid_argument("correlation_probability: zero denominator");
  return std::clamp(2.0 * p_ab / den, 0.0, 1.0);
}

PairStats pair_stats(const std::vector<JumpRecord>& jumps, int qa, int qb,
                     const std::string& name_a, const std::string& name_b, double separation_um) {
  PairStats s;
  s.qubit_a = name_a;
  s.qubit_b = name_b;
  s.separation_um = separation_um;
  s.n_cycles = jumps.size();
  if (jumps.empty()) return s;

  std::uint64_t na = 0, nb = 0, nab = 0;
  for (const auto& rec : jumps) {
    const bool ja = rec.jump[qa] != 0;
    const bool jb = rec.jump[qb] != 0;
    na += ja;
    nb += jb;
    nab += ja && jb;
  }
  const double n = static_cast<double>(jumps.size());
  s.p_obs_a = na / n;
  s.p_obs_b = nb / n;
  s.p_obs_ab = nab / n;
  s.se_p_obs_a = binom_se(s.p_obs_a, jumps.size());
  s.se_p_obs_b = binom_se(s.p_obs_b, jumps.size());
  s.se_p_obs_ab = binom_se(s.p_obs_ab, jumps.size());
  s.p_ab = corrected_joint_probability(s.p_obs_a, s.p_obs_b, s.p_obs_ab);
  s.p_corr = (s.p_obs_a + s.p_obs_b) > 0
                 ? correlation_probability(s.p_ab, s.p_obs_a, s.p_obs_b)
                 : 0.0;

  // first-order error propagation through the estimator; the three observed
  // fractions share the multinomial covariance of the cycle categories
  const double pa = s.p_obs_a, pb = s.p_obs_b, pab = s.p_obs_ab;
  const double eps = 1e-7;
  const auto f_pab = [](double a, double b, double ab) {
    const double den = 1.0 + ab - (a + b);
    return den > 0 ? std::max(0.0, (ab - a * b) / den) : 0.0;
  };
  const double g_a = (f_pab(pa + eps, pb, pab) - f_pab(pa - eps, pb, pab)) / (2 * eps);
  const double g_b = (f_pab(pa, pb + eps, pab) - f_pab(pa, pb - eps, pab)) / (2 * eps);
  const double g_ab = (f_pab(pa, pb, pab + eps) - f_pab(pa, pb, pab - eps)) / (2 * eps);
  const double var_a = pa * (1 - pa) / n;
  const double var_b = pb * (1 - pb) / n;
  const double var_ab = pab * (1 - pab) / n;
  const double cov_a_ab = pab * (1 - pa) / n;  // E[1a 1ab] = pab
  const double cov_b_ab = pab * (1 - pb) / n;
  const double cov_a_b = (pab - pa * pb) / n;
  double var =
      g_a * g_a * var_a + g_b * g_b * var_b + g_ab * g_ab * var_ab +
      2 * (g_a * g_b * cov_a_b + g_a * g_ab * cov_a_ab + g_b * g_ab * cov_b_ab);
  s.se_p_ab = std::sqrt(std::max(0.0, var));
  if (pa + pb > 0) {
    // dominant terms: scale of p_ab error plus denominator error
    const double t1 = 2.0 / (pa + pb) * s.se_p_ab;
    const double t2 = s.p_corr / (pa + pb) *
                      std::sqrt(var_a + var_b + 2 * cov_a_b);
    s.se_p_corr = std::sqrt(t1 * t1 + t2 * t2);
  }
  return s;
}

std::optional<Asymmetry> charge_asymmetry(const std::vector<JumpRecord>& jumps) {
  std::uint64_t pos = 0, total = 0;
  for (const auto& rec : jumps) {
    for (std::size_t q = 0; q < rec.jump.size(); ++q) {
      if (!rec.jump[q]) continue;
      ++total;
      if (rec.dq[q] > 0) ++pos;
    }
  }
  if (total == 0) return std::nullopt;
  Asymmetry a;
  a.count = total;
  a.value = static_cast<double>(pos) / static_cast<double>(total);
  a.se = binom_se(a.value, total);
  return a;
}

std::optional<Asymmetry> asymmetry_1324(const std::vector<JumpRecord>& jumps, int qa, int qb) {
  std::uint64_t same = 0, opposite = 0;
  for (const auto& rec : jumps) {
    if (!rec.jump[qa] || !rec.jump[qb]) continue;
    const bool sa = rec.dq[qa] > 0;
    const bool sb = rec.dq[qb] > 0;
    if (sa == sb) {
      ++same;  // quadrants 1 and 3
    } else {
      ++opposite;  // quadrants 2 and 4
    }
  }
  const std::uint64_t total = same + opposite;
  if (total == 0) return std::nullopt;
  Asymmetry a;
  a.count = total;
  a.value = (static_cast<double>(same) - static_cast<double>(opposite)) / static_cast<double>(total);
  const double p_same = static_cast<double>(same) / static_cast<double>(total);
  a.se = 2.0 * binom_se(p_same, total);  // value = 2 p_same - 1
  return a;
}

RatesReport rates_report(const std::vector<JumpRecord>& jumps,
                         const std::vector<std::string>& qubit_names,
                         const std::vector<std::pair<int, int>>& pairs, double cycle_s) {
  if (!(cycle_s > 0)) throw std::invalid_argument("rates_report: cycle time must be > 0");
  if (jumps.empty()) throw std::invalid_argument("rates_report: no cycles");
  RatesReport report;
  report.cycle_s = cycle_s;
  report.n_cycles = jumps.size();
  const double exposure = static_cast<double>(jumps.size()) * cycle_s;

  for (std::size_t q = 0; q < qubit_names.size(); ++q) {
    std::uint64_t count = 0;
    for (const auto& rec : jumps) count += rec.jump[q];
    QubitRate r;
    r.qubit = qubit_names[q];
    r.jumps = count;
    r.rate_hz = static_cast<double>(count) / exposure;
    r.se_hz = std::sqrt(static_cast<double>(count)) / exposure;
    if (count == 0) r.upper95_hz = 2.996 / exposure;
    report.per_qubit.push_back(r);
  }
  for (const auto& [qa, qb] : pairs) {
    const PairStats s = pair_stats(jumps, qa, qb, qubit_names[qa], qubit_names[qb], 0.0);
    PairRate pr;
    pr.qubit_a = qubit_names[qa];
    pr.qubit_b = qubit_names[qb];
    pr.rate_hz = s.p_ab / cycle_s;
    pr.se_hz = s.se_p_ab / cycle_s;
    report.per_pair.push_back(pr);
  }
  return report;
}

JointHistogram joint_histogram(const std::vector<JumpRecord>& jumps, int qa, int qb,
                               double bin_e) {
  JointHistogram h;
  h.bin_e = bin_e;
  h.bins = static_cast<int>(std::lround(1.0 / bin_e));
  h.counts.assign(static_cast<std::size_t>(h.bins) * h.bins, 0);
  for (const auto& rec : jumps) {
    const auto idx = [&](double dq) {
      int i = static_cast<int>((dq + 0.5) / bin_e);
      return std::clamp(i, 0, h.bins - 1);
    };
    ++h.at(idx(rec.dq[qa]), idx(rec.dq[qb]));
  }
  return h;
}

}  // namespace qburst
