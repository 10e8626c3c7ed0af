#include "qburst/induced.hpp"

#include <cmath>
#include <stdexcept>

namespace qburst {

double induced_offset_charge(const CarrierSet& carriers, const WeightingGrid& grid,
                             const Vec3& qubit_center) {
  double dq = 0;
  for (const auto& c : carriers.entries) {
    const Vec3 local{c.position.x - qubit_center.x, c.position.y - qubit_center.y, c.position.z};
    if (!grid.contains(local)) continue;
    dq += -static_cast<double>(c.sign) * static_cast<double>(c.weight) * grid.alpha_at(local);
  }
  return dq;
}

double alias_charge(double dq_e) {
  // remainder() rounds half to even; fold the +0.5 edge down
  double a = std::remainder(dq_e, 1.0);
  if (a >= 0.5) a -= 1.0;
  return a;
}

double measure_charge(double dq_aliased_e, double sigma_q_e, RngStream& rng) {
  if (sigma_q_e < 0) throw std::invalid_argument("measure_charge: sigma must be >= 0");
  if (sigma_q_e == 0) return alias_charge(dq_aliased_e);
  return alias_charge(dq_aliased_e + sigma_q_e * rng.normal());
}

double ramsey_response(double n_g_e, double contrast, double offset) {
  const double p = offset + 0.5 * contrast * std::cos(M_PI * std::cos(M_PI * n_g_e));
  if (p < -1e-12 || p > 1.0 + 1e-12) {
    throw std::invalid_argument("ramsey_response: contrast/offset leave [0,1]");
  }
  return std::clamp(p, 0.0, 1.0);
}

double fit_ramsey_offset(const std::vector<RamseyScanPoint>& scan, double contrast,
                         double offset) {
  if (scan.size() < 3) throw std::invalid_argument("fit_ramsey_offset: need >= 3 scan points");
  const auto sse = [&](double dng) {
    double s = 0;
    for (const auto& pt : scan) {
      const double r = ramsey_response(pt.applied_n_g_e + dng, contrast, offset) - pt.p1;
      s += r * r;
    }
    return s;
  };
  // coarse scan over the symmetry-reduced half period, then golden-section
  double best = 0, best_sse = sse(0.0);
  const int n_coarse = 200;
  for (int i = 1; i <= n_coarse; ++i) {
    const double d = 0.5 * i / n_coarse;
    const double s = sse(d);
    if (s < best_sse) {
      best_sse = s;
      best = d;
    }
  }
  double lo = std::max(0.0, best - 0.5 / n_coarse);
  double hi = std::min(0.5, best + 0.5 / n_coarse);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double fa = sse(a), fb = sse(b);
  for (int it = 0; it < 80; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - gr * (hi - lo);
      fa = sse(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + gr * (hi - lo);
      fb = sse(b);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace qburst
