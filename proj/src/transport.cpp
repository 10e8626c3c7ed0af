#include "qburst/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qburst {

void TransportParams::validate() const {
  if (!(lambda_trap_um > 0)) throw std::invalid_argument("transport: lambda_trap must be > 0");
  if (!(charge_efficiency > 0) || charge_efficiency > 1.0) {
    throw std::invalid_argument("transport: charge_efficiency must be in (0, 1]");
  }
  if (!(pair_energy_ev > 0)) throw std::invalid_argument("transport: pair_energy must be > 0");
  if (valley_spread_rad < 0) throw std::invalid_argument("transport: valley spread must be >= 0");
  if (max_pairs_per_event < 1) throw std::invalid_argument("transport: pair cap must be >= 1");
}

double CarrierSet::electron_weight() const {
  double w = 0;
  for (const auto& c : entries) {
    if (c.sign < 0) w += c.weight;
  }
  return w;
}

double CarrierSet::hole_weight() const {
  double w = 0;
  for (const auto& c : entries) {
    if (c.sign > 0) w += c.weight;
  }
  return w;
}

PairCreation create_pairs(const ImpactEvent& event, const TransportParams& params,
                          RngStream& rng) {
  params.validate();
  PairCreation out;
  for (const auto& seg : event.segments) {
    const long n_raw = std::lround(seg.energy_ev / params.pair_energy_ev);
    long retained = 0;
    const Vec3 dir = seg.end - seg.start;
    for (long p = 0; p < n_raw; ++p) {
      if (rng.uniform() >= params.charge_efficiency) continue;
      ++retained;
      out.pairs.push_back({seg.start + dir * rng.uniform(), 1.0});
    }
    if (n_raw > 0) {
      out.clusters.push_back(
          {seg.midpoint(), static_cast<double>(n_raw), static_cast<double>(retained)});
      out.total_retained += static_cast<double>(retained);
    }
  }
  const std::size_t cap = static_cast<std::size_t>(params.max_pairs_per_event);
  if (out.pairs.size() > cap) {
    // uniform subsample without replacement (partial Fisher-Yates)
    const double w = static_cast<double>(out.pairs.size()) / static_cast<double>(cap);
    for (std::size_t i = 0; i < cap; ++i) {
      const std::size_t j = i + rng.uniform_below(out.pairs.size() - i);
      std::swap(out.pairs[i], out.pairs[j]);
    }
    out.pairs.resize(cap);
    for (auto& p : out.pairs) p.weight = w;
  }
  return out;
}

namespace {

double exit_distance_box(const Substrate& sub, const Vec3& r, const Vec3& dir) {
  double t = std::numeric_limits<double>::infinity();
  const double hx = 0.5 * sub.side_x_um, hy = 0.5 * sub.side_y_um;
  const auto clip = [&t](double pos, double d, double lo, double hi) {
    if (d > 1e-300) {
      t = std::min(t, (hi - pos) / d);
    } else if (d < -1e-300) {
      t = std::min(t, (lo - pos) / d);
    }
  };
  clip(r.x, dir.x, -hx, hx);
  clip(r.y, dir.y, -hy, hy);
  clip(r.z, dir.z, 0.0, sub.thickness_um);
  return std::max(0.0, t);
}

// Gaussian cone about an axis: the angular offset is a 2D normal in the
// tangent plane (Rayleigh-distributed tilt).
Vec3 cone_direction(const Vec3& axis, double sigma_rad, RngStream& rng) {
  if (sigma_rad <= 0) return axis;
  const double g1 = rng.normal() * sigma_rad;
  const double g2 = rng.normal() * sigma_rad;
  const double beta = std::hypot(g1, g2);
  // tangent basis
  const Vec3 helper = std::abs(axis.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  const Vec3 t1 = axis.cross(helper).normalized();
  const Vec3 t2 = axis.cross(t1);
  const double phi = std::atan2(g2, g1);
  return (axis * std::cos(beta) + (t1 * std::cos(phi) + t2 * std::sin(phi)) * std::sin(beta))
      .normalized();
}

Vec3 flight(const Substrate& sub, const Vec3& origin, const Vec3& dir, double path) {
  const double t_exit = exit_distance_box(sub, origin, dir);
  const double t = std::min(path, t_exit);
  Vec3 final = origin + dir * t;
  // clamp out rounding excursions
  final.x = std::clamp(final.x, -0.5 * sub.side_x_um, 0.5 * sub.side_x_um);
  final.y = std::clamp(final.y, -0.5 * sub.side_y_um, 0.5 * sub.side_y_um);
  final.z = std::clamp(final.z, 0.0, sub.thickness_um);
  return final;
}

}  // namespace

CarrierSet transport(const PairCreation& pairs, const TransportParams& params,
                     const Substrate& substrate, std::uint64_t event_id, RngStream& rng) {
  const auto valleys = valley_axes(substrate);
  CarrierSet out;
  out.origin_event_id = event_id;
  out.entries.reserve(pairs.pairs.size() * 2);
  for (const auto& p : pairs.pairs) {
    // electron: valley axis with Gaussian spread
    const Vec3 axis = valleys[rng.uniform_below(6)];
    const Vec3 edir = cone_direction(axis, params.valley_spread_rad, rng);
    const double es = rng.exponential(params.lambda_trap_um);
    out.entries.push_back(
        {flight(substrate, p.position, edir, es), static_cast<float>(p.weight), -1});
    // hole: isotropic
    const Vec3 hdir = rng.isotropic_direction();
    const double hs = rng.exponential(params.lambda_trap_um);
    out.entries.push_back(
        {flight(substrate, p.position, hdir, hs), static_cast<float>(p.weight), +1});
  }
  return out;
}

std::uint64_t ChargePdfSpec::key_hash(const TransportParams& params, const Substrate& substrate,
                                      std::uint64_t samples_per_bin, std::uint64_t seed) const {
  char buf[256];
  const int n = std::snprintf(
      buf, sizeof buf, "qburst-pdf-v1|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%d|%d|%llu|%llu",
      params.lambda_trap_um, params.valley_spread_rad, substrate.thickness_um, origin_bin_um,
      xy_bin_um, z_bin_um, substrate.relative_permittivity, xy_bins, z_bins,
      static_cast<unsigned long long>(samples_per_bin), static_cast<unsigned long long>(seed));
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (int i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(buf[i]);
    h *= 0x100000001b3ull;
  }
  return h;
}

int ChargePdf::layer_of_depth(double z_um) const {
  if (z_um < 0 || z_um > thickness_um_) return -1;
  const int l = static_cast<int>(z_um / spec_.origin_bin_um);
  return std::min(l, layer_count() - 1);
}

Vec3 ChargePdf::sample(int layer_idx, RngStream& rng, bool& lost) const {
  const Layer& layer = layers_[layer_idx];
  const double total = layer.inside + layer.escaped;
  const double u = rng.uniform() * total;
  if (u >= layer.inside || layer.cumulative.empty()) {
    lost = true;
    return {};
  }
  lost = false;
  const auto it = std::upper_bound(layer.cumulative.begin(), layer.cumulative.end(), u);
  const std::size_t pos = std::min(static_cast<std::size_t>(it - layer.cumulative.begin()),
                                   layer.cumulative.size() - 1);
  const std::uint32_t code = layer.bin_index[pos];
  const int nb = spec_.xy_bins;
  const int iz = static_cast<int>(code / (nb * nb));
  const int iy = static_cast<int>((code / nb) % nb);
  const int ix = static_cast<int>(code % nb);
  const double half = 0.5 * nb * spec_.xy_bin_um;
  Vec3 r;
  r.x = -half + (ix + rng.uniform()) * spec_.xy_bin_um;
  r.y = -half + (iy + rng.uniform()) * spec_.xy_bin_um;
  r.z = (iz + rng.uniform()) * spec_.z_bin_um;  // absolute final height
  return r;
}

std::pair<ChargePdf, ChargePdf> build_charge_pdf(const TransportParams& params,
                                                 const Substrate& substrate,
                                                 std::uint64_t samples_per_bin,
                                                 std::uint64_t seed, const ChargePdfSpec& spec,
                                                 bool parallel) {
  params.validate();
  if (samples_per_bin < 10000) {
    throw std::invalid_argument("build_charge_pdf: need >= 1e4 samples per origin bin");
  }
  const int n_layers =
      static_cast<int>(std::ceil(substrate.thickness_um / spec.origin_bin_um - 1e-9));

  ChargePdf epdf, hpdf;
  epdf.sign_ = -1;
  hpdf.sign_ = +1;
  epdf.spec_ = hpdf.spec_ = spec;
  epdf.thickness_um_ = hpdf.thickness_um_ = substrate.thickness_um;
  epdf.layers_.resize(n_layers);
  hpdf.layers_.resize(n_layers);
  const std::uint64_t key = spec.key_hash(params, substrate, samples_per_bin, seed);
  epdf.key_hash = hpdf.key_hash = key;

  // transport in a laterally unbounded slab: only the top/bottom surfaces
  // and the trapping length shape the displacement table
  Substrate slab = substrate;
  slab.side_x_um = slab.side_y_um = 1e12;

  const auto valleys = valley_axes(substrate);
  const int nb = spec.xy_bins;
  const double half = 0.5 * nb * spec.xy_bin_um;

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int layer = 0; layer < n_layers; ++layer) {
    const double zlo = layer * spec.origin_bin_um;
    const double zhi = std::min(substrate.thickness_um, zlo + spec.origin_bin_um);
    std::unordered_map<std::uint32_t, std::uint64_t> ehist, hhist;
    std::uint64_t eesc = 0, hesc = 0;
    RngStream rng(seed, static_cast<std::uint64_t>(layer), rng_salt::transport);
    for (std::uint64_t s = 0; s < samples_per_bin; ++s) {
      const Vec3 origin{0, 0, rng.uniform(zlo, zhi)};
      for (int species = 0; species < 2; ++species) {
        Vec3 dir;
        if (species == 0) {
          dir = cone_direction(valleys[rng.uniform_below(6)], params.valley_spread_rad, rng);
        } else {
          dir = rng.isotropic_direction();
        }
        const Vec3 final = flight(slab, origin, dir, rng.exponential(params.lambda_trap_um));
        auto& hist = species == 0 ? ehist : hhist;
        auto& esc = species == 0 ? eesc : hesc;
        const double dx = final.x - origin.x;
        const double dy = final.y - origin.y;
        const int ix = static_cast<int>(std::floor((dx + half) / spec.xy_bin_um));
        const int iy = static_cast<int>(std::floor((dy + half) / spec.xy_bin_um));
        int iz = static_cast<int>(final.z / spec.z_bin_um);
        iz = std::min(iz, spec.z_bins - 1);
        if (ix < 0 || ix >= nb || iy < 0 || iy >= nb) {
          ++esc;
        } else {
          ++hist[static_cast<std::uint32_t>((iz * nb + iy) * nb + ix)];
        }
      }
    }
    const auto pack = [samples_per_bin](const std::unordered_map<std::uint32_t, std::uint64_t>& hist,
                                        std::uint64_t escaped, ChargePdf::Layer& out) {
      std::vector<std::pair<std::uint32_t, std::uint64_t>> entries(hist.begin(), hist.end());
      std::sort(entries.begin(), entries.end());
      out.bin_index.reserve(entries.size());
      out.cumulative.reserve(entries.size());
      double cum = 0;
      const double inv = 1.0 / static_cast<double>(samples_per_bin);
      for (const auto& [bin, count] : entries) {
        cum += static_cast<double>(count) * inv;
        out.bin_index.push_back(bin);
        out.cumulative.push_back(cum);
      }
      out.inside = cum;
      out.escaped = static_cast<double>(escaped) * inv;
      out.samples = samples_per_bin;
    };
    pack(ehist, eesc, epdf.layers_[layer]);
    pack(hhist, hesc, hpdf.layers_[layer]);
  }
  return {std::move(epdf), std::move(hpdf)};
}

CarrierSet sample_from_pdf(const ChargePdf& electrons, const ChargePdf& holes, const Vec3& origin,
                           std::uint64_t n_pairs, double weight, const Substrate& substrate,
                           RngStream& rng) {
  const int layer = electrons.layer_of_depth(origin.z);
  if (layer < 0) throw std::out_of_range("sample_from_pdf: origin depth outside the table");
  CarrierSet out;
  out.entries.reserve(2 * n_pairs);
  const auto clip = [&substrate](Vec3 r) {
    r.x = std::clamp(r.x, -0.5 * substrate.side_x_um, 0.5 * substrate.side_x_um);
    r.y = std::clamp(r.y, -0.5 * substrate.side_y_um, 0.5 * substrate.side_y_um);
    r.z = std::clamp(r.z, 0.0, substrate.thickness_um);
    return r;
  };
  for (std::uint64_t p = 0; p < n_pairs; ++p) {
    for (const ChargePdf* pdf : {&electrons, &holes}) {
      bool lost = false;
      const Vec3 d = pdf->sample(layer, rng, lost);
      if (lost) continue;  // left the tabulated window; negligible response
      out.entries.push_back(
          {clip({origin.x + d.x, origin.y + d.y, d.z}), static_cast<float>(weight), pdf->sign()});
    }
  }
  return out;
}

CarrierSet transport_via_pdf(const ChargePdf& electrons, const ChargePdf& holes,
                             const PairCreation& pairs, const Substrate& substrate,
                             std::uint64_t event_id, RngStream& rng) {
  CarrierSet out;
  out.origin_event_id = event_id;
  out.entries.reserve(2 * pairs.pairs.size());
  for (const auto& p : pairs.pairs) {
    CarrierSet one = sample_from_pdf(electrons, holes, p.position, 1, p.weight, substrate, rng);
    for (auto& c : one.entries) out.entries.push_back(c);
  }
  return out;
}

namespace {

constexpr char kPdfMagic[8] = {'Q', 'B', 'P', 'D', '0', '0', '0', '1'};

void write_layer(std::ostream& out, const ChargePdf::Layer& layer) {
  const std::uint64_t n = layer.bin_index.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(layer.bin_index.data()),
            static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
  out.write(reinterpret_cast<const char*>(layer.cumulative.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
  out.write(reinterpret_cast<const char*>(&layer.inside), sizeof layer.inside);
  out.write(reinterpret_cast<const char*>(&layer.escaped), sizeof layer.escaped);
  out.write(reinterpret_cast<const char*>(&layer.samples), sizeof layer.samples);
}

ChargePdf::Layer read_layer(std::istream& in) {
  ChargePdf::Layer layer;
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  layer.bin_index.resize(n);
  layer.cumulative.resize(n);
  in.read(reinterpret_cast<char*>(layer.bin_index.data()),
          static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
  in.read(reinterpret_cast<char*>(layer.cumulative.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  in.read(reinterpret_cast<char*>(&layer.inside), sizeof layer.inside);
  in.read(reinterpret_cast<char*>(&layer.escaped), sizeof layer.escaped);
  in.read(reinterpret_cast<char*>(&layer.samples), sizeof layer.samples);
  return layer;
}

}  // namespace

void ChargePdf::save(std::ostream& out) const {
  out.write(reinterpret_cast<const char*>(&key_hash), sizeof key_hash);
  out.write(reinterpret_cast<const char*>(&sign_), sizeof sign_);
  out.write(reinterpret_cast<const char*>(&spec_), sizeof spec_);
  out.write(reinterpret_cast<const char*>(&thickness_um_), sizeof thickness_um_);
  const std::uint32_t n = static_cast<std::uint32_t>(layers_.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (const auto& layer : layers_) write_layer(out, layer);
}

ChargePdf ChargePdf::load(std::istream& in) {
  ChargePdf pdf;
  in.read(reinterpret_cast<char*>(&pdf.key_hash), sizeof pdf.key_hash);
  in.read(reinterpret_cast<char*>(&pdf.sign_), sizeof pdf.sign_);
  in.read(reinterpret_cast<char*>(&pdf.spec_), sizeof pdf.spec_);
  in.read(reinterpret_cast<char*>(&pdf.thickness_um_), sizeof pdf.thickness_um_);
  std::uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  pdf.layers_.resize(n);
  for (auto& layer : pdf.layers_) layer = read_layer(in);
  return pdf;
}

void save_charge_pdfs(const std::string& path, const ChargePdf& electrons,
                      const ChargePdf& holes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write pdf cache " + path);
  out.write(kPdfMagic, sizeof kPdfMagic);
  electrons.save(out);
  holes.save(out);
  if (!out) throw std::runtime_error("short write on pdf cache " + path);
}

std::pair<ChargePdf, ChargePdf> load_charge_pdfs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open pdf cache " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (std::memcmp(magic, kPdfMagic, sizeof magic) != 0) {
    throw std::runtime_error("pdf cache has wrong magic/version: " + path);
  }
  ChargePdf e = ChargePdf::load(in);
  ChargePdf h = ChargePdf::load(in);
  if (!in) throw std::runtime_error("short read on pdf cache " + path);
  return {std::move(e), std::move(h)};
}

}  // namespace qburst
