#include "qburst/errors.hpp"

#include <cmath>
#include <stdexcept>

#include "qburst/units.hpp"

namespace qburst {

void TransmonParams::validate() const {
  if (!(charging_energy_hz > 0)) throw std::invalid_argument("transmon: E_C must be > 0");
  if (!(ej_over_ec > 1)) throw std::invalid_argument("transmon: xi = E_J/E_C must exceed 1");
  if (!(omega01_rad_s > 0)) throw std::invalid_argument("transmon: omega01 must be > 0");
  if (!(cycle_time_s > 0)) throw std::invalid_argument("transmon: cycle time must be > 0");
  if (!(theta_cap > 0)) throw std::invalid_argument("transmon: theta cap must be > 0");
}

double charge_dispersion_rad_s(const TransmonParams& params) {
  params.validate();
  const double xi = params.ej_over_ec;
  const double ec_over_hbar = units::e_over_hbar(params.charging_energy_hz);
  return 16.0 * std::sqrt(2.0 / M_PI) * ec_over_hbar * std::pow(0.5 * xi, 0.75) *
         std::exp(-std::sqrt(8.0 * xi)) * (16.0 * std::sqrt(0.5 * xi) + 1.0);
}

double phase_flip_error(double dq_e, double dispersion_rad_s, double tau_sc_s) {
  if (!(tau_sc_s > 0)) throw std::invalid_argument("phase_flip_error: tau_sc must be > 0");
  const double s = std::sin(0.5 * M_PI * dq_e);
  const double eps = dispersion_rad_s * dispersion_rad_s * tau_sc_s * tau_sc_s / 3.0 * s * s;
  return std::clamp(eps, 0.0, 1.0);
}

double fault_threshold(double p, int m) {
  if (!(p > 0) || !(p < 1)) throw std::invalid_argument("fault_threshold: need 0 < p < 1");
  if (m < 1) throw std::invalid_argument("fault_threshold: need m >= 1");
  double out = 1.0;
  for (int i = 0; i < m; ++i) out *= p;
  return out;
}

std::vector<Vec3> draw_dipole_directions(std::size_t n, RngStream& rng) {
  std::vector<Vec3> dirs(n);
  for (auto& d : dirs) d = rng.isotropic_direction();
  return dirs;
}

double dipole_rotation_angle(double n_charges, double grad_norm_per_um, double cos_eta,
                             const TransmonParams& params, double sound_speed_m_s) {
  const double cs_um_s = sound_speed_m_s * units::um_per_m;
  const double w = params.omega01_rad_s;
  const double k_rot = std::sqrt(units::e_over_hbar(params.charging_energy_hz) / (w * w * w));
  return 2.0 * std::sqrt(n_charges) * cs_um_s * grad_norm_per_um * k_rot * cos_eta;
}

TransientResult dipole_transient_error(const PairCreation& pairs, const WeightingGrid& grid,
                                       const Vec3& qubit_center, const TransmonParams& params,
                                       double sound_speed_m_s, std::span<const Vec3> dipole_dirs) {
  params.validate();
  if (dipole_dirs.size() != pairs.clusters.size()) {
    throw std::invalid_argument("dipole_transient_error: one dipole direction per cluster");
  }
  const double cs_um_s = sound_speed_m_s * units::um_per_m;
  const double w = params.omega01_rad_s;

  TransientResult out;
  double quad_sum = 0;
  for (std::size_t c = 0; c < pairs.clusters.size(); ++c) {
    const auto& cluster = pairs.clusters[c];
    const Vec3 local{cluster.point.x - qubit_center.x, cluster.point.y - qubit_center.y,
                     cluster.point.z};
    if (!grid.contains(local)) continue;  // zero response outside the subdomain
    if (!grid.interior(local)) {
      ++out.skipped_deposits;
      continue;
    }
    const Vec3 grad = grid.grad_alpha_at(local);  // 1/um
    const double gnorm = grad.norm();
    if (gnorm <= 0) continue;
    const double cos_eta = grad.dot(dipole_dirs[c]) / gnorm;
    const double n_charges = 2.0 * cluster.n_liberated;
    const double theta_k =
        dipole_rotation_angle(n_charges, gnorm, cos_eta, params, sound_speed_m_s);
    out.theta += theta_k;
    quad_sum += theta_k * theta_k;
    const double g = cs_um_s * gnorm / w;
    out.energy_ec += n_charges * g * g * cos_eta * cos_eta;
  }
  const double theta_eff = params.quadrature_sum ? std::sqrt(quad_sum) : out.theta;
  out.eps_theta = std::min(theta_eff * theta_eff / 6.0, params.theta_cap);
  return out;
}

TransientResult dipole_transient_error(const PairCreation& pairs, const WeightingGrid& grid,
                                       const Vec3& qubit_center, const TransmonParams& params,
                                       double sound_speed_m_s, RngStream& rng) {
  const std::vector<Vec3> dirs = draw_dipole_directions(pairs.clusters.size(), rng);
  return dipole_transient_error(pairs, grid, qubit_center, params, sound_speed_m_s,
                                std::span<const Vec3>(dirs));
}

NonadiabaticSurface nonadiabatic_surface(const WeightingGrid& grid, const TransmonParams& params,
                                         double sound_speed_m_s) {
  params.validate();
  const double cs_um_s = sound_speed_m_s * units::um_per_m;
  const double ec_over_hbar = units::e_over_hbar(params.charging_energy_hz);
  const double w2 = params.omega01_rad_s * params.omega01_rad_s;

  NonadiabaticSurface out;
  const auto& xs = grid.xs();
  const auto& ys = grid.ys();
  const auto& zs = grid.zs();
  for (int k = 1; k + 1 < grid.nz(); ++k) {
    if (zs[k] > grid.zs()[grid.interface_layer()]) break;  // substrate side only
    for (int j = 1; j + 1 < grid.ny(); ++j) {
      for (int i = 1; i + 1 < grid.nx(); ++i) {
        // nodal gradient by central differences on the stored values
        const double gx = (grid.value(i + 1, j, k) - grid.value(i - 1, j, k)) /
                          (xs[i + 1] - xs[i - 1]);
        const double gy = (grid.value(i, j + 1, k) - grid.value(i, j - 1, k)) /
                          (ys[j + 1] - ys[j - 1]);
        const double gz = (grid.value(i, j, k + 1) - grid.value(i, j, k - 1)) /
                          (zs[k + 1] - zs[k - 1]);
        const double gnorm = std::sqrt(gx * gx + gy * gy + gz * gz);
        if (cs_um_s * gnorm * ec_over_hbar >= w2) {
          out.cells.push_back({i, j, k});
          const double vol = 0.5 * (xs[i + 1] - xs[i - 1]) * 0.5 * (ys[j + 1] - ys[j - 1]) * 0.5 *
                             (zs[k + 1] - zs[k - 1]);
          out.volume_um3 += vol;
        }
      }
    }
  }
  return out;
}

ErrorReport exceedance_curves(const std::vector<EventOutcome>& outcomes,
                              const std::vector<std::pair<int, int>>& pairs,
                              const std::vector<std::string>& qubit_names,
                              const std::vector<double>& separations_um,
                              const std::vector<double>& levels, JointRule rule) {
  if (outcomes.empty()) throw std::invalid_argument("exceedance_curves: no events");
  ErrorReport report;
  report.n_events = outcomes.size();
  const double n = static_cast<double>(outcomes.size());

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [qa, qb] = pairs[p];
    PairExceedance pe;
    pe.qubit_a = qubit_names[qa];
    pe.qubit_b = qubit_names[qb];
    pe.separation_um = p < separations_um.size() ? separations_um[p] : 0.0;
    const auto joint = [rule](double a, double b) {
      return rule == JointRule::min_rule ? std::min(a, b) : std::sqrt(a * b);
    };
    for (double level : levels) {
      std::uint64_t n_phi = 0, n_theta = 0;
      for (const auto& ev : outcomes) {
        const auto& a = ev.per_qubit[qa];
        const auto& b = ev.per_qubit[qb];
        if (joint(a.eps_phi, b.eps_phi) > level) ++n_phi;
        if (joint(a.eps_theta, b.eps_theta) > level) ++n_theta;
      }
      const double f_phi = n_phi / n;
      const double f_theta = n_theta / n;
      pe.phase.push_back({level, f_phi, std::sqrt(std::max(0.0, f_phi * (1 - f_phi) / n))});
      pe.bit.push_back({level, f_theta, std::sqrt(std::max(0.0, f_theta * (1 - f_theta) / n))});
    }
    report.pairs.push_back(std::move(pe));
  }
  for (int m = 1; m <= 4; ++m) report.threshold_pm.push_back(fault_threshold(1e-2, m));
  return report;
}

}  // namespace qburst
