#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qburst/induced.hpp"
#include "qburst/transport.hpp"
#include "qburst/weighting.hpp"

namespace qburst {

struct TransmonParams {
  double charging_energy_hz = 250e6;  // E_C/h
  double ej_over_ec = 50.0;           // xi
  double omega01_rad_s = 3.141592653589793e10;  // 2 pi x 5 GHz
  double cycle_time_s = 1e-6;         // tau_sc, surface-code cycle
  double theta_cap = 0.5;             // eps_theta saturation (small-angle formula)
  bool quadrature_sum = false;        // add per-deposit rotations in quadrature

  double josephson_energy_hz() const { return ej_over_ec * charging_energy_hz; }
  void validate() const;
};

// Half the peak-to-peak modulation of the 01 transition with offset charge:
// 16 sqrt(2/pi) (E_C/hbar) (xi/2)^{3/4} exp(-sqrt(8 xi)) [16 sqrt(xi/2) + 1],
// rad/s. Exponentially small in sqrt(xi).
double charge_dispersion_rad_s(const TransmonParams& params);

// eps_phi = (dispersion^2 tau_sc^2 / 3) sin^2(pi dq / 2), dq in e; the sine
// makes it 2e-periodic, so the unaliased charge can be passed directly.
double phase_flip_error(double dq_e, double dispersion_rad_s, double tau_sc_s);

// p_m = p^m: fault-tolerant threshold for errors correlated across m qubits.
double fault_threshold(double p, int m);

struct TransientResult {
  double theta = 0.0;
  double eps_theta = 0.0;
  double energy_ec = 0.0;  // transient energy deposited in the mode, E_C units
  int skipped_deposits = 0;  // gradient unavailable (outside/near grid edge)
};

// theta = 2 sqrt(n) c_s |grad alpha| sqrt(E_C/(hbar w01^3)) cos(eta) for a
// single deposit of n discrete charges; grad in 1/um.
double dipole_rotation_angle(double n_charges, double grad_norm_per_um, double cos_eta,
                             const TransmonParams& params, double sound_speed_m_s);

// Spurious rotation from the sudden dipole growth of the freed charge cloud:
// per deposit theta_k = 2 sqrt(n_k) c_s |grad alpha| sqrt(E_C/(hbar w^3)) cos(eta),
// summed signed across the track (or in quadrature when configured).
// n_k counts discrete charges, i.e. twice the retained pairs. dipole_dirs
// supplies one random unit dipole orientation per cluster so that all qubits
// see the same physical transient.
TransientResult dipole_transient_error(const PairCreation& pairs, const WeightingGrid& grid,
                                       const Vec3& qubit_center, const TransmonParams& params,
                                       double sound_speed_m_s,
                                       std::span<const Vec3> dipole_dirs);

// Convenience overload drawing the dipole orientations from rng.
TransientResult dipole_transient_error(const PairCreation& pairs, const WeightingGrid& grid,
                                       const Vec3& qubit_center, const TransmonParams& params,
                                       double sound_speed_m_s, RngStream& rng);

std::vector<Vec3> draw_dipole_directions(std::size_t n, RngStream& rng);

struct NonadiabaticSurface {
  struct Cell {
    int i, j, k;
  };
  std::vector<Cell> cells;
  double volume_um3 = 0.0;
};

// Cells where c_s |grad alpha| E_C/hbar >= omega01^2, i.e. where a charge
// moving at the sound speed shifts the qubit frequency faster than the
// qubit oscillates.
NonadiabaticSurface nonadiabatic_surface(const WeightingGrid& grid, const TransmonParams& params,
                                         double sound_speed_m_s);

enum class JointRule : std::uint8_t { min_rule, geometric_mean };

struct ExceedancePoint {
  double level = 0;
  double fraction = 0;
  double se = 0;
};

struct PairExceedance {
  std::string qubit_a, qubit_b;
  double separation_um = 0;
  std::vector<ExceedancePoint> phase;  // joint eps_phi
  std::vector<ExceedancePoint> bit;    // joint eps_theta
};

struct ErrorReport {
  std::vector<PairExceedance> pairs;
  std::vector<double> threshold_pm;  // p^m for m = 1..4 at p = 1e-2
  std::uint64_t n_events = 0;
};

// Fraction of events whose joint pair error exceeds each level; the joint
// error is min(eps_a, eps_b) under the default rule.
ErrorReport exceedance_curves(const std::vector<EventOutcome>& outcomes,
                              const std::vector<std::pair<int, int>>& pairs,
                              const std::vector<std::string>& qubit_names,
                              const std::vector<double>& separations_um,
                              const std::vector<double>& levels,
                              JointRule rule = JointRule::min_rule);

}  // namespace qburst
