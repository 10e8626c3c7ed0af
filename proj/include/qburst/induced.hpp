#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qburst/events.hpp"
#include "qburst/rng.hpp"
#include "qburst/transport.hpp"
#include "qburst/weighting.hpp"

namespace qburst {

struct QubitOutcome {
  double dq_raw_e = 0.0;       // unaliased induced offset charge
  double dq_aliased_e = 0.0;   // folded into [-0.5, 0.5)
  double dq_measured_e = 0.0;  // aliased + readout noise, re-aliased
  double eps_phi = 0.0;
  double eps_theta = 0.0;
  double transient_energy_ec = 0.0;  // burst-transient energy in E_C units
  int transient_skipped = 0;         // deposits with no usable gradient
};

struct EventOutcome {
  std::uint64_t event_id = 0;
  Species species = Species::gamma;
  double time_s = 0.0;
  std::vector<QubitOutcome> per_qubit;  // layout order
};

// Sum over carriers of (-sign) weight alpha(r): a trapped electron near the
// island induces positive offset charge. Carriers outside the solved
// subdomain contribute zero.
double induced_offset_charge(const CarrierSet& carriers, const WeightingGrid& grid,
                             const Vec3& qubit_center);

// Fold into [-0.5, 0.5) with round-half-to-even at the midpoint.
double alias_charge(double dq_e);

// Aliased charge plus Gaussian readout noise, re-aliased.
double measure_charge(double dq_aliased_e, double sigma_q_e, RngStream& rng);

// Ramsey transfer function, parity-insensitive and 1e-periodic:
// P1 = offset + contrast cos(pi cos(pi n_g)) / 2 with n_g in units of e.
double ramsey_response(double n_g_e, double contrast, double offset);

struct RamseyScanPoint {
  double applied_n_g_e;
  double p1;
};

// Least-squares recovery of the intrinsic offset charge from a gate-charge
// scan. The response is even and 1e-periodic, so the result is reported in
// [0, 0.5]; distances to it must be taken modulo that symmetry.
double fit_ramsey_offset(const std::vector<RamseyScanPoint>& scan, double contrast, double offset);

}  // namespace qburst
