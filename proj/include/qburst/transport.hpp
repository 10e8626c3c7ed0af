#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qburst/events.hpp"
#include "qburst/geometry.hpp"
#include "qburst/rng.hpp"

namespace qburst {

struct TransportParams {
  double lambda_trap_um = 300.0;
  double charge_efficiency = 0.2;  // f_q, Bernoulli thinning per pair
  double pair_energy_ev = 3.6;
  double valley_spread_rad = 15.0 * M_PI / 180.0;  // sigma_v, Gaussian cone about a valley axis
  // Importance-sampling cap: pairs beyond this are uniformly subsampled and
  // the survivors reweighted, bounding memory per event.
  int max_pairs_per_event = 20000;

  void validate() const;
};

struct PairOrigin {
  Vec3 position;
  double weight = 1.0;
};

// One entry per track segment that produced pairs. n_liberated counts the
// pairs created before recombination thinning: every liberated charge moves
// ballistically during the first instants, so the burst transient sees them
// all even though only the f_q survivors carry charge to the qubits.
struct DepositCluster {
  Vec3 point;
  double n_liberated = 0.0;
  double n_retained = 0.0;
};

struct PairCreation {
  std::vector<PairOrigin> pairs;  // post f_q, post cap (weights > 1 when capped)
  std::vector<DepositCluster> clusters;
  double total_retained = 0.0;
};

// round(E / pair_energy) pairs per segment, uniform along it, each kept with
// probability f_q, then capped.
PairCreation create_pairs(const ImpactEvent& event, const TransportParams& params,
                          RngStream& rng);

struct Carrier {
  Vec3 position;
  float weight = 1.0f;
  std::int8_t sign = -1;  // -1 electron, +1 hole
};

struct CarrierSet {
  std::uint64_t origin_event_id = 0;
  std::vector<Carrier> entries;

  double electron_weight() const;
  double hole_weight() const;
};

// Single-flight kinematics: each carrier draws an exponential free path
// (mean lambda_trap) and a direction - isotropic for holes, a Gaussian cone
// about one of the six <100> valley axes for electrons - and rests where the
// path ends or where it meets a surface.
CarrierSet transport(const PairCreation& pairs, const TransportParams& params,
                     const Substrate& substrate, std::uint64_t event_id, RngStream& rng);

// Tabulated final-position distributions, one layer per 10 um of origin
// depth. x/y are displacements from the origin; z is the absolute final
// height, so surface pile-up is represented exactly. Mass that leaves the
// lateral window is tracked per layer as escaped weight.
struct ChargePdfSpec {
  double origin_bin_um = 10.0;
  double xy_bin_um = 10.0;
  double z_bin_um = 375.0 / 101.0;
  int xy_bins = 101;  // centered on the origin
  int z_bins = 101;   // spanning the substrate thickness

  std::uint64_t key_hash(const TransportParams& params, const Substrate& substrate,
                         std::uint64_t samples_per_bin, std::uint64_t seed) const;
};

class ChargePdf {
 public:
  struct Layer {
    std::vector<std::uint32_t> bin_index;  // sorted, sparse
    std::vector<double> cumulative;        // inclusive weight sums
    double inside = 0.0;
    double escaped = 0.0;
    std::uint64_t samples = 0;
  };

  const ChargePdfSpec& spec() const { return spec_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  const Layer& layer(int i) const { return layers_[i]; }
  int layer_of_depth(double z_um) const;  // -1 outside the table
  std::int8_t sign() const { return sign_; }  // -1 electron, +1 hole
  double thickness_um() const { return thickness_um_; }

  // Draws (dx, dy, z_final); lost=true when the draw fell in the escaped
  // lateral mass.
  Vec3 sample(int layer, RngStream& rng, bool& lost) const;

  void save(std::ostream& out) const;
  static ChargePdf load(std::istream& in);

  std::uint64_t key_hash = 0;

 private:
  friend std::pair<ChargePdf, ChargePdf> build_charge_pdf(const TransportParams&,
                                                          const Substrate&, std::uint64_t,
                                                          std::uint64_t, const ChargePdfSpec&,
                                                          bool);
  std::int8_t sign_ = -1;
  ChargePdfSpec spec_;
  double thickness_um_ = 375.0;
  std::vector<Layer> layers_;
};

// Monte Carlo tabulation; parallelizes over origin-depth layers.
std::pair<ChargePdf, ChargePdf> build_charge_pdf(const TransportParams& params,
                                                 const Substrate& substrate,
                                                 std::uint64_t samples_per_bin,
                                                 std::uint64_t seed,
                                                 const ChargePdfSpec& spec = {},
                                                 bool parallel = true);

// Final positions for n_pairs at one origin by weighted choice from the
// origin-depth layer, translated laterally and clipped to the substrate.
CarrierSet sample_from_pdf(const ChargePdf& electrons, const ChargePdf& holes, const Vec3& origin,
                           std::uint64_t n_pairs, double weight, const Substrate& substrate,
                           RngStream& rng);

// Event-level convenience mirroring transport() for pdf-table mode.
CarrierSet transport_via_pdf(const ChargePdf& electrons, const ChargePdf& holes,
                             const PairCreation& pairs, const Substrate& substrate,
                             std::uint64_t event_id, RngStream& rng);

void save_charge_pdfs(const std::string& path, const ChargePdf& electrons, const ChargePdf& holes);
std::pair<ChargePdf, ChargePdf> load_charge_pdfs(const std::string& path);

}  // namespace qburst
