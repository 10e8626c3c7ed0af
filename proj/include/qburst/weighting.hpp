#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qburst/geometry.hpp"
#include "qburst/vec.hpp"

namespace qburst {

enum class LateralBc : std::uint8_t {
  grounded,  // alpha = 0 on the subdomain walls
  mirror,    // zero normal flux (used by the parallel-plate oracle)
};

// Discretization of the electrostatic response solve. The in-plane mesh is
// uniform over the island/gap core and geometrically stretched outside it;
// z is uniform through the substrate and stretched through the vacuum above
// the metal plane and, when vacuum_below_um > 0, through the gap down to
// the grounded enclosure floor.
struct GridSpec {
  double core_spacing_um = 5.0;
  double core_radius_um = 150.0;
  double stretch_ratio = 1.07;
  double half_width_um = 2600.0;
  double dz_substrate_um = 375.0 / 101.0;
  double vacuum_above_um = 500.0;
  double vacuum_below_um = 750.0;
  double z_stretch_ratio = 1.25;
  double tolerance = 1e-6;  // max node update per sweep
  int max_iterations = 30000;
  double omega = 0.0;  // 0 = 2/(1+sin(pi/N)) for the largest grid dimension
  LateralBc lateral_bc = LateralBc::grounded;

  std::uint64_t key_hash(const Substrate& substrate, const QubitGeometry& qubit) const;
};

struct SolveOptions {
  bool parallel = true;  // OpenMP red-black sweeps; serial sweeps are bitwise identical
};

class solver_error : public std::runtime_error {
 public:
  solver_error(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// alpha(r): offset charge induced on the qubit island by a unit point charge
// at r, sampled in qubit-local coordinates (origin at the island center in
// x/y, z as in the lab frame). Values are clamped to [0, 1] on lookup.
class WeightingGrid {
 public:
  double alpha_at(const Vec3& local) const;       // throws std::out_of_range outside bounds
  double alpha_or_zero(const Vec3& local) const;  // 0 outside the subdomain
  Vec3 grad_alpha_at(const Vec3& local) const;    // 1/um; throws within one cell of bounds
  bool contains(const Vec3& local) const;
  bool interior(const Vec3& local) const;

  int nx() const { return static_cast<int>(xs_.size()); }
  int ny() const { return static_cast<int>(ys_.size()); }
  int nz() const { return static_cast<int>(zs_.size()); }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  const std::vector<double>& zs() const { return zs_; }
  double value(int i, int j, int k) const {
    return values_[(static_cast<std::size_t>(k) * ys_.size() + j) * xs_.size() + i];
  }
  int interface_layer() const { return k_interface_; }

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }
  const std::string& qubit_id() const { return qubit_id_; }
  std::uint64_t key_hash() const { return key_hash_; }

  void save(const std::string& path) const;
  static WeightingGrid load(const std::string& path);

 private:
  friend WeightingGrid solve_weighting(const ChipLayout&, const std::string&, const GridSpec&,
                                       const SolveOptions&);
  void build_lookup();
  int cell_of(const std::vector<double>& axis, const std::vector<int>& accel, double accel_step,
              double pos) const;

  std::string qubit_id_;
  std::uint64_t key_hash_ = 0;
  std::vector<double> xs_, ys_, zs_;
  std::vector<double> values_;
  int k_interface_ = 0;
  double residual_ = 0.0;
  int iterations_ = 0;

  std::vector<int> ax_, ay_, az_;  // lookup acceleration tables
  double ax_step_ = 1, ay_step_ = 1, az_step_ = 1;
};

// Finite-volume Laplace solve for the weighting potential of one qubit:
// island at 1, top-surface groundplane and far boundaries at 0, dielectric
// handled by flux continuity, red-black SOR iteration.
WeightingGrid solve_weighting(const ChipLayout& layout, const std::string& qubit_id,
                              const GridSpec& spec, const SolveOptions& options = {});

// Cache wrapper: reuses a saved grid when the (geometry, spec) hash matches.
// Identical qubit geometries share one cache entry since the solve is done
// in qubit-local coordinates.
WeightingGrid solve_or_load(const ChipLayout& layout, const std::string& qubit_id,
                            const GridSpec& spec, const std::string& cache_dir,
                            const SolveOptions& options = {});

}  // namespace qburst
