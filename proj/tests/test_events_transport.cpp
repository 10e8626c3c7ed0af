#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qburst/events.hpp"
#include "qburst/transport.hpp"
#include "test_support.hpp"

using namespace qburst;
using qburst::testing::ks_test;
using qburst::testing::ks_two_sample;

namespace {

const Substrate kSub;

ImpactEvent point_event(double energy_ev, const Vec3& pos = {0, 0, 187.0}) {
  ImpactEvent ev;
  ev.segments.push_back({pos, pos, energy_ev});
  return ev;
}

}  // namespace

TEST_CASE("gamma sampling: mean deposit and determinism") {
  SourceSpec spec;
  RngStream rng(1, 0);
  double acc = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    RngStream body(spec.rng_seed, i, rng_salt::event_body);
    const ImpactEvent ev = sample_gamma(spec, kSub, i, body);
    acc += ev.total_energy_ev();
    if (i < 200) {
      for (const auto& s : ev.segments) {
        CHECK(kSub.contains(s.start));
        CHECK(kSub.contains(s.end));
      }
    }
  }
  CHECK(acc / n == doctest::Approx(100e3).epsilon(0.05));
  // analytic mean of the truncated exponential
  CHECK(spec.gamma_spectrum.mean_ev() == doctest::Approx(99954.6).epsilon(1e-3));

  SUBCASE("fixed seed reproduces the event") {
    RngStream b1(9, 123, rng_salt::event_body);
    RngStream b2(9, 123, rng_salt::event_body);
    const ImpactEvent e1 = sample_gamma(spec, kSub, 123, b1);
    const ImpactEvent e2 = sample_gamma(spec, kSub, 123, b2);
    CHECK(e1.segments[0].start.x == e2.segments[0].start.x);
    CHECK(e1.segments[0].energy_ev == e2.segments[0].energy_ev);
  }
}

TEST_CASE("tabulated spectrum delta at the pair energy makes one pair") {
  SourceSpec spec;
  spec.gamma_spectrum = GammaSpectrum::from_points({{3.5999, 1.0}, {3.6001, 1.0}});
  TransportParams params;
  params.charge_efficiency = 1.0;
  RngStream rng(2, 0);
  for (int i = 0; i < 50; ++i) {
    RngStream body(spec.rng_seed, i, rng_salt::event_body);
    const ImpactEvent ev = sample_gamma(spec, kSub, i, body);
    RngStream prng(spec.rng_seed, i, rng_salt::pair_creation);
    const PairCreation pairs = create_pairs(ev, params, prng);
    CHECK(pairs.pairs.size() == 1);
  }
}

TEST_CASE("muon sampling") {
  SUBCASE("vertical limit gives exactly thickness x dE/dx") {
    SourceSpec spec;
    spec.muon_zenith_exponent = std::numeric_limits<double>::infinity();
    spec.muon_dedx_sigma = 0.0;
    spec.muon_dedx_ev_um = 387.0;
    RngStream body(1, 0, rng_salt::event_body);
    const ImpactEvent ev = sample_muon(spec, kSub, 0, body);
    CHECK(ev.total_energy_ev() == doctest::Approx(375.0 * 387.0).epsilon(1e-9));
    CHECK(ev.segments.size() == 15);
    for (const auto& s : ev.segments) CHECK(s.length_um() == doctest::Approx(25.0));
  }
  SUBCASE("default calibration lands the mean deposit at 460 keV") {
    SourceSpec spec;
    double acc = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      RngStream body(spec.rng_seed, i, rng_salt::event_body);
      acc += sample_muon(spec, kSub, i, body).total_energy_ev();
    }
    CHECK(acc / n == doctest::Approx(460e3).epsilon(0.10));
  }
  SUBCASE("zenith distribution matches cos^2") {
    SourceSpec spec;
    std::vector<double> cosines;
    for (int i = 0; i < 100000; ++i) {
      RngStream body(spec.rng_seed, i, rng_salt::event_body);
      const ImpactEvent ev = sample_muon(spec, kSub, i, body);
      const Vec3 dir = (ev.segments[0].end - ev.segments[0].start).normalized();
      cosines.push_back(-dir.z);
    }
    // cos^2 zenith density: CDF(c) = c^3
    const double p = ks_test(cosines, [](double c) { return c * c * c; });
    CHECK(p > 0.01);
  }
  SUBCASE("all segments stay inside the substrate") {
    SourceSpec spec;
    for (int i = 0; i < 2000; ++i) {
      RngStream body(spec.rng_seed, i, rng_salt::event_body);
      const ImpactEvent ev = sample_muon(spec, kSub, i, body);
      double total = 0;
      for (const auto& s : ev.segments) {
        CHECK(kSub.contains(s.start));
        CHECK(kSub.contains(s.end));
        total += s.energy_ev;
      }
      CHECK(total == doctest::Approx(ev.total_energy_ev()));
      CHECK(total > 0.0);
    }
  }
}

TEST_CASE("event stream") {
  SUBCASE("species fraction follows the rates") {
    SourceSpec spec;  // 19.8 mHz gamma, 0.5 mHz muon
    const auto events = sample_event_stream(spec, kSub, 20000);
    double gammas = 0;
    double prev_t = -1;
    for (const auto& ev : events) {
      gammas += ev.species == Species::gamma;
      CHECK(ev.time_s > prev_t);
      prev_t = ev.time_s;
    }
    CHECK(gammas / events.size() == doctest::Approx(19.8 / 20.3).epsilon(0.01));
  }
  SUBCASE("zero duration or zero rates give an empty stream") {
    SourceSpec spec;
    CHECK(sample_event_stream_for(spec, kSub, 0.0).empty());
    spec.gamma_rate_hz = 0.0;
    spec.muon_rate_hz = 0.0;
    CHECK(sample_event_stream_for(spec, kSub, 1e4).empty());
  }
  SUBCASE("duration mode arrival count is Poisson-consistent") {
    SourceSpec spec;
    const double duration = 2e6;  // ~40600 expected events at 20.3 mHz
    const auto events = sample_event_stream_for(spec, kSub, duration);
    const double expected = duration * (spec.gamma_rate_hz + spec.muon_rate_hz);
    CHECK(std::abs(static_cast<double>(events.size()) - expected) < 5.0 * std::sqrt(expected));
    CHECK(events.back().time_s <= duration);
  }
  SUBCASE("fixed seed reproduces the stream exactly") {
    SourceSpec spec;
    const auto a = sample_event_stream(spec, kSub, 500);
    const auto b = sample_event_stream(spec, kSub, 500);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].species == b[i].species);
      CHECK(a[i].time_s == b[i].time_s);
      CHECK(a[i].total_energy_ev() == b[i].total_energy_ev());
    }
  }
}

TEST_CASE("jsonl roundtrip") {
  SourceSpec spec;
  const auto events = sample_event_stream(spec, kSub, 100);
  std::stringstream ss;
  write_events_jsonl(ss, events);
  const auto back = read_events_jsonl(ss);
  REQUIRE(back.size() == events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(back[i].event_id == events[i].event_id);
    CHECK(back[i].species == events[i].species);
    CHECK(back[i].time_s == events[i].time_s);
    REQUIRE(back[i].segments.size() == events[i].segments.size());
    for (std::size_t s = 0; s < events[i].segments.size(); ++s) {
      CHECK(back[i].segments[s].start.x == events[i].segments[s].start.x);
      CHECK(back[i].segments[s].energy_ev == events[i].segments[s].energy_ev);
    }
  }
}

TEST_CASE("pair creation") {
  TransportParams params;
  SUBCASE("full efficiency count is deterministic") {
    params.charge_efficiency = 1.0;
    params.max_pairs_per_event = 100000;
    RngStream rng(3, 0);
    const PairCreation pairs = create_pairs(point_event(100e3), params, rng);
    CHECK(pairs.pairs.size() == 27778);
    CHECK(pairs.total_retained == doctest::Approx(27778.0));
    REQUIRE(pairs.clusters.size() == 1);
    CHECK(pairs.clusters[0].n_retained == doctest::Approx(27778.0));
  }
  SUBCASE("thinning mean matches the binomial expectation") {
    params.charge_efficiency = 0.2;
    params.max_pairs_per_event = 100000;
    double acc = 0;
    const int reps = 10000;
    for (int i = 0; i < reps; ++i) {
      RngStream rng(4, i, rng_salt::pair_creation);
      acc += create_pairs(point_event(100e3), params, rng).pairs.size();
    }
    CHECK(acc / reps == doctest::Approx(27778.0 * 0.2).epsilon(0.02));
  }
  SUBCASE("zero energy makes zero pairs") {
    RngStream rng(5, 0);
    CHECK(create_pairs(point_event(0.0), params, rng).pairs.empty());
  }
  SUBCASE("importance cap reweights uniformly") {
    params.charge_efficiency = 1.0;
    params.max_pairs_per_event = 5000;
    RngStream rng(6, 0);
    const PairCreation pairs = create_pairs(point_event(100e3), params, rng);
    CHECK(pairs.pairs.size() == 5000);
    const double w = 27778.0 / 5000.0;
    for (const auto& p : pairs.pairs) CHECK(p.weight == doctest::Approx(w));
    // clusters keep the pre-cap count for the burst transient
    CHECK(pairs.clusters[0].n_retained == doctest::Approx(27778.0));
  }
}

TEST_CASE("transport kinematics") {
  TransportParams params;
  SUBCASE("immediate trapping keeps carriers at the origin") {
    params.lambda_trap_um = 1e-9;
    RngStream rng(7, 0);
    const PairCreation pairs = create_pairs(point_event(50e3), params, rng);
    RngStream trng(7, 0, rng_salt::transport);
    const CarrierSet out = transport(pairs, params, kSub, 0, trng);
    for (const auto& c : out.entries) {
      CHECK(std::abs(c.position.x - 0.0) < 1e-6);
      CHECK(std::abs(c.position.z - 187.0) < 1e-6);
    }
  }
  SUBCASE("charge neutrality and containment") {
    RngStream rng(8, 0);
    const PairCreation pairs = create_pairs(point_event(200e3), params, rng);
    RngStream trng(8, 0, rng_salt::transport);
    const CarrierSet out = transport(pairs, params, kSub, 0, trng);
    CHECK(out.electron_weight() == doctest::Approx(out.hole_weight()));
    for (const auto& c : out.entries) CHECK(kSub.contains(c.position));
  }
  SUBCASE("holes are isotropic, electrons concentrate along valley axes") {
    params.lambda_trap_um = 120.0;  // keep most flights inside
    PairCreation pairs;
    const int n = 100000;
    for (int i = 0; i < n; ++i) pairs.pairs.push_back({{0, 0, 187.0}, 1.0});
    RngStream trng(9, 0, rng_salt::transport);
    const CarrierSet out = transport(pairs, params, kSub, 0, trng);

    const auto axes = valley_axes(kSub);
    const double cone = std::cos(15.0 * M_PI / 180.0);
    double e_axial = 0, h_axial = 0, ne = 0, nh = 0;
    Vec3 h_mean{};
    std::vector<double> h_disp2;
    for (const auto& c : out.entries) {
      const Vec3 d = c.position - Vec3{0, 0, 187.0};
      if (d.norm() < 1e-9) continue;
      const Vec3 u = d.normalized();
      bool axial = false;
      for (const auto& a : axes) axial |= u.dot(a) > cone;
      if (c.sign < 0) {
        e_axial += axial;
        ne += 1;
      } else {
        h_axial += axial;
        nh += 1;
        h_mean += d;
        h_disp2.push_back(d.norm2());
      }
    }
    // isotropic reference: 6 caps of half-angle 15 degrees = 10.2% of the sphere
    CHECK(e_axial / ne > 0.25);
    CHECK(h_axial / nh == doctest::Approx(0.102).epsilon(0.15));
    // hole ensemble mean displacement consistent with zero
    const double rms = std::sqrt(qburst::testing::mean(h_disp2));
    const double se = rms / std::sqrt(nh);
    CHECK(std::abs(h_mean.x / nh) < 4 * se);
    CHECK(std::abs(h_mean.y / nh) < 4 * se);
  }
  SUBCASE("lateral mirror symmetry at distribution level") {
    PairCreation pairs;
    for (int i = 0; i < 20000; ++i) pairs.pairs.push_back({{0, 0, 187.0}, 1.0});
    RngStream t1(10, 0, rng_salt::transport);
    RngStream t2(11, 0, rng_salt::transport);
    const CarrierSet a = transport(pairs, TransportParams{}, kSub, 0, t1);
    const CarrierSet b = transport(pairs, TransportParams{}, kSub, 0, t2);
    std::vector<double> xa, xb_neg;
    for (const auto& c : a.entries) xa.push_back(c.position.x);
    for (const auto& c : b.entries) xb_neg.push_back(-c.position.x);
    CHECK(ks_two_sample(xa, xb_neg) > 0.01);
  }
  SUBCASE("deterministic under a fixed stream") {
    RngStream r1(12, 77, rng_salt::transport);
    RngStream r2(12, 77, rng_salt::transport);
    PairCreation pairs;
    pairs.pairs.push_back({{100, -50, 200.0}, 1.0});
    const CarrierSet a = transport(pairs, params, kSub, 77, r1);
    const CarrierSet b = transport(pairs, params, kSub, 77, r2);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      CHECK(a.entries[i].position.x == b.entries[i].position.x);
      CHECK(a.entries[i].position.z == b.entries[i].position.z);
    }
  }
}

TEST_CASE("charge pdf tables") {
  TransportParams params;
  SUBCASE("mass conservation per layer") {
    const auto [e, h] = build_charge_pdf(params, kSub, 20000, 5);
    REQUIRE(e.layer_count() == 38);
    for (int l = 0; l < e.layer_count(); ++l) {
      CHECK(e.layer(l).inside + e.layer(l).escaped == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(h.layer(l).inside + h.layer(l).escaped == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(e.layer(l).inside <= 1.0 + 1e-9);
    }
  }
  SUBCASE("longer trapping length empties the central bin") {
    TransportParams tight = params;
    tight.lambda_trap_um = 30.0;
    TransportParams loose = params;
    loose.lambda_trap_um = 300.0;
    const auto [e30, h30] = build_charge_pdf(tight, kSub, 20000, 6);
    const auto [e300, h300] = build_charge_pdf(loose, kSub, 20000, 6);
    // central mass: draw and count small displacements
    const auto central_mass = [](const ChargePdf& pdf, int layer) {
      RngStream rng(99, layer);
      int central = 0;
      const int n = 20000;
      for (int i = 0; i < n; ++i) {
        bool lost = false;
        const Vec3 d = pdf.sample(layer, rng, lost);
        if (!lost && std::hypot(d.x, d.y) < 15.0) ++central;
      }
      return static_cast<double>(central) / n;
    };
    CHECK(central_mass(e300, 18) < central_mass(e30, 18));
  }
  SUBCASE("near-delta trapping keeps samples at the origin bin") {
    TransportParams frozen = params;
    frozen.lambda_trap_um = 1e-3;
    const auto [e, h] = build_charge_pdf(frozen, kSub, 20000, 7);
    RngStream rng(100, 0);
    for (int i = 0; i < 200; ++i) {
      bool lost = false;
      const Vec3 d = e.sample(18, rng, lost);
      REQUIRE_FALSE(lost);
      CHECK(std::abs(d.x) <= 10.0);
      CHECK(std::abs(d.y) <= 10.0);
      CHECK(std::abs(d.z - 185.0) <= 12.0);
    }
  }
  SUBCASE("lateral translation equivariance before clipping") {
    const auto [e, h] = build_charge_pdf(params, kSub, 20000, 8);
    RngStream r1(101, 0);
    RngStream r2(101, 0);
    const CarrierSet at_origin = sample_from_pdf(e, h, {0, 0, 187.0}, 200, 1.0, kSub, r1);
    const CarrierSet shifted = sample_from_pdf(e, h, {500.0, -250.0, 187.0}, 200, 1.0, kSub, r2);
    REQUIRE(at_origin.entries.size() == shifted.entries.size());
    for (std::size_t i = 0; i < at_origin.entries.size(); ++i) {
      CHECK(shifted.entries[i].position.x ==
            doctest::Approx(at_origin.entries[i].position.x + 500.0).epsilon(1e-12));
      CHECK(shifted.entries[i].position.y ==
            doctest::Approx(at_origin.entries[i].position.y - 250.0).epsilon(1e-12));
      CHECK(shifted.entries[i].position.z == at_origin.entries[i].position.z);
    }
  }
  SUBCASE("origin outside the table is rejected") {
    const auto [e, h] = build_charge_pdf(params, kSub, 20000, 9);
    RngStream rng(102, 0);
    CHECK_THROWS_AS(sample_from_pdf(e, h, {0, 0, 500.0}, 1, 1.0, kSub, rng), std::out_of_range);
  }
  SUBCASE("two half draws match one full draw in distribution") {
    const auto [e, h] = build_charge_pdf(params, kSub, 20000, 10);
    RngStream r1(103, 0);
    RngStream r2(104, 0);
    std::vector<double> full, halves;
    const CarrierSet f = sample_from_pdf(e, h, {0, 0, 187.0}, 4000, 1.0, kSub, r1);
    for (const auto& c : f.entries) full.push_back(c.position.x);
    for (int rep = 0; rep < 2; ++rep) {
      const CarrierSet hset = sample_from_pdf(e, h, {0, 0, 187.0}, 2000, 1.0, kSub, r2);
      for (const auto& c : hset.entries) halves.push_back(c.position.x);
    }
    CHECK(ks_two_sample(full, halves) > 0.01);
  }
  SUBCASE("cache roundtrip") {
    const auto [e, h] = build_charge_pdf(params, kSub, 20000, 11);
    save_charge_pdfs("pdf_cache_test.bin", e, h);
    const auto [e2, h2] = load_charge_pdfs("pdf_cache_test.bin");
    CHECK(e2.key_hash == e.key_hash);
    CHECK(e2.layer_count() == e.layer_count());
    CHECK(e2.layer(5).inside == e.layer(5).inside);
    CHECK(e2.sign() == -1);
    CHECK(h2.sign() == +1);
    std::remove("pdf_cache_test.bin");
  }
}
