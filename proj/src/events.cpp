#include "qburst/events.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qburst {

const char* species_name(Species s) { return s == Species::gamma ? "gamma" : "muon"; }

double ImpactEvent::total_energy_ev() const {
  double e = 0;
  for (const auto& seg : segments) e += seg.energy_ev;
  return e;
}

GammaSpectrum GammaSpectrum::exponential(double mean_ev, double max_ev) {
  if (!(mean_ev > 0) || !(max_ev > mean_ev)) {
    throw std::invalid_argument("gamma spectrum: need 0 < mean < max");
  }
  GammaSpectrum s;
  s.tabulated_ = false;
  s.mean_ = mean_ev;
  s.max_ = max_ev;
  return s;
}

GammaSpectrum GammaSpectrum::from_points(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("gamma spectrum table needs >= 2 points");
  std::sort(points.begin(), points.end());
  GammaSpectrum s;
  s.tabulated_ = true;
  for (const auto& [e, d] : points) {
    if (e < 0 || d < 0) throw std::invalid_argument("gamma spectrum table entries must be >= 0");
    s.energy_.push_back(e);
    s.density_.push_back(d);
  }
  // trapezoid CDF over the piecewise-linear density
  s.cdf_.assign(s.energy_.size(), 0.0);
  for (std::size_t i = 1; i < s.energy_.size(); ++i) {
    const double de = s.energy_[i] - s.energy_[i - 1];
    s.cdf_[i] = s.cdf_[i - 1] + 0.5 * (s.density_[i] + s.density_[i - 1]) * de;
  }
  const double total = s.cdf_.back();
  if (!(total > 0)) throw std::invalid_argument("gamma spectrum table has zero mass");
  for (auto& c : s.cdf_) c /= total;
  for (auto& d : s.density_) d /= total;
  return s;
}

GammaSpectrum GammaSpectrum::from_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spectrum table " + path);
  std::vector<std::pair<double, double>> pts;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double e, d;
    if (ls >> e >> d) pts.emplace_back(e, d);
  }
  return from_points(std::move(pts));
}

double GammaSpectrum::sample(RngStream& rng) const {
  if (!tabulated_) {
    // inverse CDF of an exponential truncated at max_
    const double cap = 1.0 - std::exp(-max_ / mean_);
    return -mean_ * std::log(1.0 - rng.uniform() * cap);
  }
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t i = std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  const double c0 = cdf_[i - 1], c1 = cdf_[i];
  const double f = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
  return energy_[i - 1] + f * (energy_[i] - energy_[i - 1]);
}

double GammaSpectrum::mean_ev() const {
  if (!tabulated_) {
    const double l = mean_, cap = max_;
    const double q = std::exp(-cap / l);
    return l - cap * q / (1.0 - q);
  }
  double m = 0;
  for (std::size_t i = 1; i < energy_.size(); ++i) {
    const double de = energy_[i] - energy_[i - 1];
    // first moment of the linear density over the panel
    m += de * (density_[i - 1] * (2 * energy_[i - 1] + energy_[i]) +
               density_[i] * (energy_[i - 1] + 2 * energy_[i])) / 6.0;
  }
  return m;
}

std::string GammaSpectrum::describe() const {
  std::ostringstream os;
  if (tabulated_) {
    os << "table[" << energy_.size() << " pts, " << energy_.front() << ".." << energy_.back()
       << " eV]";
  } else {
    os << "exponential(mean " << mean_ << " eV, max " << max_ << " eV)";
  }
  return os.str();
}

void SourceSpec::validate() const {
  if (gamma_rate_hz < 0 || muon_rate_hz < 0) {
    throw std::invalid_argument("source: rates must be >= 0");
  }
  if (!(muon_dedx_ev_um > 0)) throw std::invalid_argument("source: muon dE/dx must be > 0");
  if (muon_dedx_sigma < 0) throw std::invalid_argument("source: muon dE/dx sigma must be >= 0");
  if (!(muon_zenith_exponent >= 0)) {
    throw std::invalid_argument("source: zenith exponent must be >= 0");
  }
  if (!(muon_segment_step_um > 0)) throw std::invalid_argument("source: segment step must be > 0");
  if (gamma_segment_length_um < 0) {
    throw std::invalid_argument("source: gamma segment length must be >= 0");
  }
}

namespace {

// distance to the box wall along dir from an interior point
double exit_distance(const Substrate& sub, const Vec3& r, const Vec3& dir) {
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
  return t;
}

}  // namespace

ImpactEvent sample_gamma(const SourceSpec& spec, const Substrate& substrate,
                         std::uint64_t event_id, RngStream& rng) {
  ImpactEvent ev;
  ev.event_id = event_id;
  ev.species = Species::gamma;
  const Vec3 pos{rng.uniform(-0.5 * substrate.side_x_um, 0.5 * substrate.side_x_um),
                 rng.uniform(-0.5 * substrate.side_y_um, 0.5 * substrate.side_y_um),
                 rng.uniform(0.0, substrate.thickness_um)};
  const double energy = spec.gamma_spectrum.sample(rng);
  Vec3 end = pos;
  if (spec.gamma_segment_length_um > 0) {
    const Vec3 dir = rng.isotropic_direction();
    const double len = std::min(spec.gamma_segment_length_um, exit_distance(substrate, pos, dir));
    end = pos + dir * len;
  }
  ev.segments.push_back({pos, end, energy});
  return ev;
}

ImpactEvent sample_muon(const SourceSpec& spec, const Substrate& substrate,
                        std::uint64_t event_id, RngStream& rng) {
  ImpactEvent ev;
  ev.event_id = event_id;
  ev.species = Species::muon;

  Vec3 entry, dir;
  double chord = 0;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    entry = {rng.uniform(-0.5 * substrate.side_x_um, 0.5 * substrate.side_x_um),
             rng.uniform(-0.5 * substrate.side_y_um, 0.5 * substrate.side_y_um),
             substrate.thickness_um};
    const double n = spec.muon_zenith_exponent;
    const double c = std::isinf(n) ? 1.0 : std::pow(rng.uniform(), 1.0 / (n + 1.0));
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    dir = {s * std::cos(phi), s * std::sin(phi), -c};
    chord = exit_distance(substrate, entry, dir);
    if (chord >= 1.0) break;  // grazing tracks are resampled
    chord = 0;
  }
  if (chord == 0) throw std::runtime_error("sample_muon: could not draw a non-grazing chord");

  const int n_seg = std::max(1, static_cast<int>(std::ceil(chord / spec.muon_segment_step_um)));
  const double seg_len = chord / n_seg;
  const double sig = spec.muon_dedx_sigma;
  const double mu_log = -0.5 * sig * sig;  // unit-mean log-normal
  const auto clamp_to_box = [&substrate](Vec3 r) {
    r.x = std::clamp(r.x, -0.5 * substrate.side_x_um, 0.5 * substrate.side_x_um);
    r.y = std::clamp(r.y, -0.5 * substrate.side_y_um, 0.5 * substrate.side_y_um);
    r.z = std::clamp(r.z, 0.0, substrate.thickness_um);
    return r;
  };
  for (int i = 0; i < n_seg; ++i) {
    const Vec3 a = clamp_to_box(entry + dir * (i * seg_len));
    const Vec3 b = clamp_to_box(entry + dir * ((i + 1) * seg_len));
    double fluct = 1.0;
    if (sig > 0) fluct = std::exp(mu_log + sig * rng.normal());
    ev.segments.push_back({a, b, seg_len * spec.muon_dedx_ev_um * fluct});
  }
  return ev;
}

std::vector<ImpactEvent> sample_event_stream(const SourceSpec& spec, const Substrate& substrate,
                                             std::uint64_t n_events) {
  spec.validate();
  substrate.validate();
  const double total_rate = spec.gamma_rate_hz + spec.muon_rate_hz;
  const double p_gamma = total_rate > 0 ? spec.gamma_rate_hz / total_rate : 1.0;

  std::vector<ImpactEvent> events;
  events.reserve(n_events);
  double t = 0;
  for (std::uint64_t id = 0; id < n_events; ++id) {
    RngStream time_rng(spec.rng_seed, id, rng_salt::event_time);
    RngStream species_rng(spec.rng_seed, id, rng_salt::event_species);
    RngStream body_rng(spec.rng_seed, id, rng_salt::event_body);
    t += total_rate > 0 ? time_rng.exponential(1.0 / total_rate) : 0.0;
    const bool is_gamma = species_rng.uniform() < p_gamma;
    ImpactEvent ev = is_gamma ? sample_gamma(spec, substrate, id, body_rng)
                              : sample_muon(spec, substrate, id, body_rng);
    ev.time_s = t;
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<ImpactEvent> sample_event_stream_for(const SourceSpec& spec,
                                                 const Substrate& substrate, double duration_s) {
  spec.validate();
  substrate.validate();
  if (duration_s < 0) throw std::invalid_argument("duration must be >= 0");
  const double total_rate = spec.gamma_rate_hz + spec.muon_rate_hz;
  std::vector<ImpactEvent> events;
  if (total_rate <= 0 || duration_s == 0) return events;
  const double p_gamma = spec.gamma_rate_hz / total_rate;
  double t = 0;
  for (std::uint64_t id = 0;; ++id) {
    RngStream time_rng(spec.rng_seed, id, rng_salt::event_time);
    RngStream species_rng(spec.rng_seed, id, rng_salt::event_species);
    RngStream body_rng(spec.rng_seed, id, rng_salt::event_body);
    t += time_rng.exponential(1.0 / total_rate);
    if (t > duration_s) break;
    const bool is_gamma = species_rng.uniform() < p_gamma;
    ImpactEvent ev = is_gamma ? sample_gamma(spec, substrate, id, body_rng)
                              : sample_muon(spec, substrate, id, body_rng);
    ev.time_s = t;
    events.push_back(std::move(ev));
  }
  return events;
}

void write_events_jsonl(std::ostream& out, const std::vector<ImpactEvent>& events) {
  using nlohmann::json;
  for (const auto& ev : events) {
    json segs = json::array();
    for (const auto& s : ev.segments) {
      segs.push_back({s.start.x, s.start.y, s.start.z, s.end.x, s.end.y, s.end.z, s.energy_ev});
    }
    const json j{{"event_id", ev.event_id},
                 {"species", species_name(ev.species)},
                 {"time_s", ev.time_s},
                 {"segments", segs}};
    out << j.dump() << "\n";
  }
}

std::vector<ImpactEvent> read_events_jsonl(std::istream& in) {
  using nlohmann::json;
  std::vector<ImpactEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    ImpactEvent ev;
    ev.event_id = j.at("event_id").get<std::uint64_t>();
    ev.species = j.at("species").get<std::string>() == "muon" ? Species::muon : Species::gamma;
    ev.time_s = j.at("time_s").get<double>();
    for (const auto& s : j.at("segments")) {
      TrackSegment seg;
      seg.start = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
      seg.end = {s.at(3).get<double>(), s.at(4).get<double>(), s.at(5).get<double>()};
      seg.energy_ev = s.at(6).get<double>();
      ev.segments.push_back(seg);
    }
    events.push_back(std::move(ev));
  }
  return events;
}

}  // namespace qburst
