#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "qburst/errors.hpp"
#include "qburst/geometry.hpp"
#include "qburst/induced.hpp"
#include "qburst/mathx.hpp"
#include "qburst/recovery.hpp"
#include "qburst/rng.hpp"
#include "qburst/stats.hpp"
#include "qburst/units.hpp"
#include "test_support.hpp"

using namespace qburst;
using qburst::testing::mean;
using qburst::testing::stddev;

namespace {

double separation(const QubitGeometry& a, const QubitGeometry& b) {
  return std::hypot(a.center_x_um - b.center_x_um, a.center_y_um - b.center_y_um);
}

}  // namespace

TEST_CASE("default layout reproduces the three pair separations") {
  const ChipLayout layout = default_layout();
  REQUIRE(layout.qubits.size() == 4);
  CHECK(separation(layout.qubit("Q3"), layout.qubit("Q4")) == doctest::Approx(340.0));
  CHECK(separation(layout.qubit("Q1"), layout.qubit("Q2")) == doctest::Approx(640.0));
  CHECK(separation(layout.qubit("Q1"), layout.qubit("Q3")) == doctest::Approx(3195.0));
  CHECK(layout.substrate.side_x_um == 6250.0);
  CHECK(layout.substrate.thickness_um == 375.0);
  CHECK(layout.anchor_fraction == 0.2);
  CHECK_NOTHROW(layout.validate());
  for (const auto& q : layout.qubits) {
    CHECK(q.josephson_energy_hz / q.charging_energy_hz == doctest::Approx(24.0));
  }
}

TEST_CASE("layout is mirror symmetric about the chip center") {
  const ChipLayout layout = default_layout();
  // reflecting x swaps the pair centers
  const auto center_of = [&](const char* a, const char* b) {
    const auto& qa = layout.qubit(a);
    const auto& qb = layout.qubit(b);
    return std::pair{0.5 * (qa.center_x_um + qb.center_x_um),
                     0.5 * (qa.center_y_um + qb.center_y_um)};
  };
  const auto [x12, y12] = center_of("Q1", "Q2");
  const auto [x34, y34] = center_of("Q3", "Q4");
  CHECK(x12 == doctest::Approx(-x34));
  CHECK(y12 == doctest::Approx(y34));
}

TEST_CASE("geometry invariants reject degenerate inputs") {
  QubitGeometry q;
  q.id = "bad";
  q.island_radius_um = 0.0;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  CHECK_THROWS_AS(sensing_area_um2(q, 11.7), std::invalid_argument);

  QubitGeometry swapped;
  swapped.id = "swapped";
  swapped.island_radius_um = 90.5;
  swapped.cavity_radius_um = 70.0;
  CHECK_THROWS_AS(swapped.validate(), std::invalid_argument);

  ChipLayout layout = default_layout();
  layout.qubits[1].id = layout.qubits[0].id;
  CHECK_THROWS_AS(layout.validate(), std::invalid_argument);

  ChipLayout outside = default_layout();
  outside.qubits[0].center_x_um = 3200.0;
  CHECK_THROWS_AS(outside.validate(), std::invalid_argument);
}

TEST_CASE("sensing area") {
  QubitGeometry q;
  q.id = "q";
  SUBCASE("device values") {
    CHECK(sensing_area_um2(q, 11.7) == doctest::Approx(232853.2767).epsilon(1e-6));
  }
  SUBCASE("unit case") {
    q.island_radius_um = 1.0;
    q.cavity_radius_um = 1.0 + 1e-9;
    CHECK(sensing_area_um2(q, 1.0) == doctest::Approx(M_PI).epsilon(1e-6));
  }
}

TEST_CASE("valley axes sit at 45 degrees to the chip edge") {
  const Substrate sub;
  const auto axes = valley_axes(sub);
  int vertical = 0;
  for (const auto& a : axes) {
    CHECK(a.norm() == doctest::Approx(1.0));
    if (std::abs(a.z) > 0.99) {
      ++vertical;
    } else {
      CHECK(std::abs(a.dot(sub.crystal_axis_edge)) == doctest::Approx(1.0 / std::sqrt(2.0)));
    }
  }
  CHECK(vertical == 2);
}

TEST_CASE("layout json roundtrip") {
  const ChipLayout layout = default_layout();
  const std::string path = "layout_roundtrip.json";
  save_layout(layout, path);
  const ChipLayout back = load_layout(path);
  REQUIRE(back.qubits.size() == layout.qubits.size());
  for (std::size_t i = 0; i < layout.qubits.size(); ++i) {
    CHECK(back.qubits[i].id == layout.qubits[i].id);
    CHECK(back.qubits[i].center_x_um == layout.qubits[i].center_x_um);
    CHECK(back.qubits[i].charging_energy_hz == layout.qubits[i].charging_energy_hz);
  }
  std::remove(path.c_str());
}

TEST_CASE("rng streams are deterministic and independent of construction order") {
  RngStream a(42, 7, 1);
  RngStream b(42, 7, 1);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, 8, 1);
  bool any_diff = false;
  RngStream a2(42, 7, 1);
  for (int i = 0; i < 16; ++i) any_diff |= a2.next_u64() != c.next_u64();
  CHECK(any_diff);
}

TEST_CASE("rng distributions behave") {
  RngStream rng(1, 0);
  std::vector<double> normals(100000);
  for (auto& x : normals) x = rng.normal();
  CHECK(std::abs(mean(normals)) < 0.02);
  CHECK(stddev(normals) == doctest::Approx(1.0).epsilon(0.02));
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.isotropic_direction().norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("erfcx fixtures") {
  // reference values computed with 30-digit arithmetic
  const std::pair<double, double> fixtures[] = {
      {0.0, 1.0},
      {0.3, 0.73459933456765514},
      {1.0, 0.427583576155807},
      {2.5, 0.21080636406114358},
      {5.0, 0.11070463773306863},
      {8.0, 0.069985166200880928},
      {11.9, 0.04724523248408767},
      {12.5, 0.044992099001027921},
      {20.0, 0.028174348741051319},
      {30.0, 0.018795888861416751},
      {100.0, 0.0056416137829894329},
      {-0.5, 1.9523604891825571},
      {-2.0, 108.94090438997797},
      {-5.0, 144009798674.66104},
  };
  for (const auto& [x, want] : fixtures) {
    CHECK(erfcx(x) == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("alias folds into [-0.5, 0.5)") {
  CHECK(alias_charge(0.6) == doctest::Approx(-0.4));
  CHECK(alias_charge(-0.5) == doctest::Approx(-0.5));
  CHECK(alias_charge(0.1) == doctest::Approx(0.1));
  CHECK(alias_charge(0.5) == doctest::Approx(-0.5));
  CHECK(alias_charge(2.5) == doctest::Approx(-0.5));
  CHECK(alias_charge(0.51) == doctest::Approx(-0.49));

  RngStream rng(3, 0);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-40.0, 40.0);
    const double a = alias_charge(x);
    CHECK(a >= -0.5);
    CHECK(a < 0.5);
    CHECK(std::remainder(x - a, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    const int k = static_cast<int>(rng.uniform_below(7)) - 3;
    CHECK(alias_charge(x + k) == doctest::Approx(a));
  }
}

TEST_CASE("measurement noise") {
  SUBCASE("zero sigma is the identity") {
    RngStream rng(5, 0);
    CHECK(measure_charge(0.37, 0.0, rng) == doctest::Approx(0.37));
  }
  SUBCASE("sample std matches sigma") {
    RngStream rng(5, 1);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = measure_charge(0.0, 0.02, rng);
    CHECK(stddev(xs) == doctest::Approx(0.02).epsilon(0.02));
  }
  SUBCASE("noise composes with aliasing") {
    // 0.49 pushed past the fold comes back negative
    CHECK(alias_charge(0.49 + 0.02) == doctest::Approx(-0.49));
  }
}

TEST_CASE("ramsey response symmetry and periodicity") {
  RngStream rng(11, 0);
  for (int i = 0; i < 200; ++i) {
    const double ng = rng.uniform(-3.0, 3.0);
    CHECK(ramsey_response(ng, 0.9, 0.45) ==
          doctest::Approx(ramsey_response(ng + 1.0, 0.9, 0.45)).epsilon(1e-12));
    CHECK(ramsey_response(ng, 0.9, 0.45) ==
          doctest::Approx(ramsey_response(-ng, 0.9, 0.45)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(ramsey_response(0.5, 1.5, 0.9), std::invalid_argument);
}

TEST_CASE("ramsey scan fit recovers the injected offset") {
  RngStream rng(17, 0);
  int within = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const double truth = rng.uniform(0.05, 0.45);
    std::vector<RamseyScanPoint> scan;
    for (int j = 0; j < 10; ++j) {
      const double applied = j / 10.0;
      const double noisy = truth + 0.02 * rng.normal();
      scan.push_back({applied, ramsey_response(applied + noisy, 0.9, 0.45)});
    }
    const double fit = fit_ramsey_offset(scan, 0.9, 0.45);
    double err = std::abs(fit - truth);
    err = std::min(err, std::abs(fit + truth - 1.0));  // even/periodic image
    if (err <= 0.02) ++within;
    CHECK(err < 0.06);
  }
  CHECK(within >= trials - 3);
}

TEST_CASE("coincidence-corrected estimator on the reference row") {
  const double p_ab = corrected_joint_probability(0.055, 0.061, 0.027);
  CHECK(p_ab == doctest::Approx(0.025954995).epsilon(1e-6));
  CHECK(std::round(p_ab * 1000) / 1000 == doctest::Approx(0.026));
  CHECK(correlation_probability(p_ab, 0.055, 0.061) == doctest::Approx(0.44749991).epsilon(1e-6));

  SUBCASE("independent inputs have no excess coincidence") {
    CHECK(corrected_joint_probability(0.1, 0.2, 0.1 * 0.2) == doctest::Approx(0.0));
  }
  SUBCASE("pathological denominator") {
    CHECK_THROWS_AS(corrected_joint_probability(0.9, 0.8, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(correlation_probability(0.1, 0.0, 0.0), std::invalid_argument);
  }
  SUBCASE("clamps") {
    CHECK(correlation_probability(0.0, 0.1, 0.1) == doctest::Approx(0.0));
  }
}

TEST_CASE("estimator round trip on synthetic cycles") {
  // forward-compose observed probabilities from ground truth, then invert
  const double pab_true = 0.02, pa_true = 0.03, pb_true = 0.035;
  RngStream rng(23, 0);
  const std::uint64_t n = 200000;
  std::uint64_t na = 0, nb = 0, nab = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const bool corr = rng.uniform() < pab_true;
    const bool a = corr || rng.uniform() < pa_true;
    const bool b = corr || rng.uniform() < pb_true;
    na += a;
    nb += b;
    nab += a && b;
  }
  const double pa_obs = static_cast<double>(na) / n;
  const double pb_obs = static_cast<double>(nb) / n;
  const double pab_obs = static_cast<double>(nab) / n;
  const double pab_est = corrected_joint_probability(pa_obs, pb_obs, pab_obs);
  // 4 sigma on the joint fraction
  const double se = 4.0 * std::sqrt(pab_obs * (1 - pab_obs) / n);
  CHECK(std::abs(pab_est - pab_true) < se);
  // exact identity in exact arithmetic
  const double pa_o = pab_true + pa_true * (1 - pab_true);
  const double pb_o = pab_true + pb_true * (1 - pab_true);
  const double pab_o = pab_true + pa_true * pb_true * (1 - pab_true);
  CHECK(corrected_joint_probability(pa_o, pb_o, pab_o) == doctest::Approx(pab_true).epsilon(1e-12));
}

TEST_CASE("jump detection threshold rule") {
  EventOutcome ev;
  ev.event_id = 0;
  for (double dq : {0.09, 0.11, 0.1, -0.3, 0.0}) {
    QubitOutcome qo;
    qo.dq_measured_e = dq;
    ev.per_qubit.push_back(qo);
  }
  const auto jumps = detect_jumps({ev}, 0.1);
  REQUIRE(jumps.size() == 1);
  CHECK(jumps[0].jump[0] == 0);  // 0.09
  CHECK(jumps[0].jump[1] == 1);  // 0.11
  CHECK(jumps[0].jump[2] == 0);  // exactly at threshold stays out
  CHECK(jumps[0].jump[3] == 1);
  CHECK(jumps[0].jump[4] == 0);

  CHECK(detect_jumps({}, 0.1).empty());
  CHECK_THROWS_AS(detect_jumps({ev}, 0.6), std::invalid_argument);
}

TEST_CASE("asymmetries") {
  std::vector<JumpRecord> jumps;
  SUBCASE("all positive jumps") {
    for (int i = 0; i < 10; ++i) {
      jumps.push_back({static_cast<std::uint64_t>(i), {0.3, 0.2}, {1, 1}});
    }
    const auto asym = charge_asymmetry(jumps);
    REQUIRE(asym.has_value());
    CHECK(asym->value == doctest::Approx(1.0));
    const auto a13 = asymmetry_1324(jumps, 0, 1);
    REQUIRE(a13.has_value());
    CHECK(a13->value == doctest::Approx(1.0));
  }
  SUBCASE("balanced synthetic jumps are symmetric") {
    RngStream rng(31, 0);
    for (int i = 0; i < 4000; ++i) {
      const double a = (rng.uniform() < 0.5 ? 1 : -1) * rng.uniform(0.15, 0.45);
      const double b = (rng.uniform() < 0.5 ? 1 : -1) * rng.uniform(0.15, 0.45);
      jumps.push_back({static_cast<std::uint64_t>(i), {a, b}, {1, 1}});
    }
    const auto asym = charge_asymmetry(jumps);
    REQUIRE(asym.has_value());
    CHECK(std::abs(asym->value - 0.5) < 4 * asym->se);
    const auto a13 = asymmetry_1324(jumps, 0, 1);
    REQUIRE(a13.has_value());
    CHECK(std::abs(a13->value) < 4 * a13->se);
  }
  SUBCASE("no jumps means undefined") {
    CHECK_FALSE(charge_asymmetry(jumps).has_value());
    CHECK_FALSE(asymmetry_1324(jumps, 0, 1).has_value());
  }
}

TEST_CASE("rates report") {
  std::vector<JumpRecord> jumps;
  const std::uint64_t n = 20000;
  for (std::uint64_t i = 0; i < n; ++i) {
    const bool j = i % 1000 < 55;  // p_obs = 0.055
    jumps.push_back({i, {j ? 0.3 : 0.0}, {static_cast<std::uint8_t>(j ? 1 : 0)}});
  }
  const auto report = rates_report(jumps, {"Q1"}, {}, 44.0);
  CHECK(report.per_qubit[0].rate_hz == doctest::Approx(0.055 / 44.0).epsilon(1e-9));
  CHECK(report.per_qubit[0].rate_hz == doctest::Approx(1.25e-3).epsilon(1e-3));

  SUBCASE("zero jumps reports an upper bound") {
    std::vector<JumpRecord> empty_jumps;
    for (std::uint64_t i = 0; i < 100; ++i) empty_jumps.push_back({i, {0.0}, {0}});
    const auto r = rates_report(empty_jumps, {"Q1"}, {}, 44.0);
    CHECK(r.per_qubit[0].rate_hz == 0.0);
    CHECK(r.per_qubit[0].upper95_hz > 0.0);
  }
  SUBCASE("zero cycles is an error") {
    CHECK_THROWS_AS(rates_report({}, {"Q1"}, {}, 44.0), std::invalid_argument);
  }
}

TEST_CASE("charge dispersion formula") {
  TransmonParams params;  // E_C/h = 250 MHz, xi = 50
  const double disp = charge_dispersion_rad_s(params);
  CHECK(disp == doctest::Approx(37430.9033561).epsilon(1e-9));
  CHECK(disp / units::two_pi == doctest::Approx(6000.0).epsilon(0.02));

  SUBCASE("monotone decreasing in xi") {
    TransmonParams doubled = params;
    doubled.ej_over_ec = 100.0;
    CHECK(charge_dispersion_rad_s(doubled) < disp);
  }
  SUBCASE("linear in E_C at fixed xi") {
    TransmonParams scaled = params;
    scaled.charging_energy_hz *= 2.0;
    CHECK(charge_dispersion_rad_s(scaled) == doctest::Approx(2.0 * disp).epsilon(1e-12));
  }
}

TEST_CASE("phase flip error") {
  const double disp = units::two_pi * 6000.0;
  CHECK(phase_flip_error(0.0, disp, 1e-6) == doctest::Approx(0.0));
  CHECK(phase_flip_error(1.0, disp, 1e-6) == doctest::Approx(4.737410113e-4).epsilon(1e-9));
  RngStream rng(37, 0);
  for (int i = 0; i < 100; ++i) {
    const double dq = rng.uniform(-4.0, 4.0);
    CHECK(phase_flip_error(dq, disp, 1e-6) ==
          doctest::Approx(phase_flip_error(dq + 2.0, disp, 1e-6)).epsilon(1e-9));
    CHECK(phase_flip_error(dq, disp, 1e-6) ==
          doctest::Approx(phase_flip_error(-dq, disp, 1e-6)).epsilon(1e-9));
    CHECK(phase_flip_error(dq, disp, 1e-6) <= phase_flip_error(1.0, disp, 1e-6) + 1e-15);
  }
}

TEST_CASE("fault threshold table") {
  CHECK(fault_threshold(1e-2, 2) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(fault_threshold(1e-2, 3) == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(fault_threshold(0.37, 1) == doctest::Approx(0.37));
  double prev = 1.0;
  for (int m = 1; m <= 6; ++m) {
    const double pm = fault_threshold(1e-2, m);
    CHECK(pm < prev);
    prev = pm;
  }
  CHECK_THROWS_AS(fault_threshold(0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(fault_threshold(1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(fault_threshold(0.5, 0), std::invalid_argument);
}

TEST_CASE("dipole rotation angle fixture") {
  // independent scalar evaluation: n = 1e4 charges, |grad| = 1e3 1/m,
  // omega01 = 2 pi x 5 GHz, E_C/h = 250 MHz, c_s = 6e3 m/s, cos eta = 1
  TransmonParams params;
  const double theta = dipole_rotation_angle(1e4, 1e3 * 1e-6, 1.0, params, 6e3);
  CHECK(theta == doctest::Approx(8.54115052101e-3).epsilon(1e-9));
  CHECK(theta * theta / 6.0 == doctest::Approx(1.21585420371e-5).epsilon(1e-9));

  SUBCASE("scaling laws") {
    CHECK(dipole_rotation_angle(4e4, 1e-3, 1.0, params, 6e3) ==
          doctest::Approx(2.0 * theta).epsilon(1e-12));
    CHECK(dipole_rotation_angle(1e4, 1e-3, 1.0, params, 12e3) ==
          doctest::Approx(2.0 * theta).epsilon(1e-12));
  }
}

TEST_CASE("dropout curve fixtures") {
  RecoveryParams p;  // tau = 130 us, sigma = 210 us
  const std::pair<double, double> fixtures[] = {
      {-2000e-6, 7.1569703480168063e-22},
      {-800e-6, 5.0292150647992981e-5},
      {-400e-6, 0.017245959370566084},
      {-200e-6, 0.08787570468864642},
      {-100e-6, 0.1451092203903152},
      {-50e-6, 0.17280580342674688},
      {0.0, 0.19581472016943792},
      {50e-6, 0.21133586311496264},
      {100e-6, 0.21748646414663974},
      {200e-6, 0.20079473275462127},
      {400e-6, 0.10433086235432852},
      {800e-6, 0.0077247512347006857},
      {1500e-6, 3.5937550762184528e-5},
      {3000e-6, 3.5031465567199187e-10},
  };
  for (const auto& [t, want] : fixtures) {
    CHECK(dropout_curve(t, p) == doctest::Approx(want).epsilon(1e-11));
    CHECK(std::abs(dropout_curve(t, p) - want) < 1e-9);
  }
  SUBCASE("asymptotics") {
    // causal: vanishes far before the trigger
    CHECK(dropout_curve(-5e-3, p) < 1e-100);
    // pure exponential tail at late times
    const double tail = std::exp(p.sigma_s * p.sigma_s / (2 * p.tau_s * p.tau_s) - 3e-3 / p.tau_s);
    CHECK(dropout_curve(3e-3, p) / tail == doctest::Approx(1.0).epsilon(1e-6));
    for (double t = -1e-3; t < 3e-3; t += 37e-6) {
      const double v = dropout_curve(t, p);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("dropout fit recovers noiseless parameters exactly") {
  RecoveryParams truth;
  std::vector<DropoutSample> samples;
  for (double t = -600e-6; t <= 1400e-6; t += 40e-6) {
    samples.push_back({t, dropout_curve(t, truth)});
  }
  const DropoutFit fit = fit_dropout(samples, 80e-6, 120e-6);
  CHECK(fit.converged);
  CHECK(fit.tau_s == doctest::Approx(truth.tau_s).epsilon(1e-6));
  CHECK(fit.sigma_s == doctest::Approx(truth.sigma_s).epsilon(1e-6));
}

TEST_CASE("dropout fit on binomially noisy synthetic data") {
  RecoveryParams truth;
  RngStream rng(41, 0);
  const auto samples = simulate_dropout_experiment(truth, -600e-6, 1500e-6, 40e-6, 142, rng);
  const DropoutFit fit = fit_dropout(samples, 90e-6, 150e-6);
  CHECK(fit.tau_s == doctest::Approx(truth.tau_s).epsilon(0.10));
  CHECK(fit.tau_se > 0.0);
}

TEST_CASE("dropout fit flags flat data") {
  std::vector<DropoutSample> flat;
  for (double t = 0; t < 2000e-6; t += 40e-6) flat.push_back({t, 0.2});
  bool flagged = false;
  try {
    const DropoutFit fit = fit_dropout(flat, 100e-6, 200e-6);
    flagged = fit.tau_unbounded;
  } catch (const std::runtime_error&) {
    flagged = true;
  }
  CHECK(flagged);
}

TEST_CASE("quasiparticle density conversion") {
  RecoveryParams p;  // gap 190 ueV, omega01 = 2 pi x 4.5 GHz
  CHECK(rate_from_xqp(1e-6, p) == doctest::Approx(40668.22644).epsilon(1e-8));
  CHECK(xqp_from_rate(0.0, p) == doctest::Approx(0.0));
  for (double x : {1e-8, 3e-7, 2e-6, 5e-5}) {
    CHECK(xqp_from_rate(rate_from_xqp(x, p), p) == doctest::Approx(x).epsilon(1e-14));
  }
  CHECK_THROWS_AS(xqp_from_rate(-1.0, p), std::invalid_argument);
}

TEST_CASE("phonon dwell time") {
  const ChipLayout layout = default_layout();
  const double dwell = phonon_dwell_time_s(layout);
  CHECK(dwell == doctest::Approx(86.80555556e-6).epsilon(1e-8));
  // order 100 us, within a factor 2 of the fitted recovery time
  CHECK(dwell > 50e-6);
  CHECK(dwell < 200e-6);
  CHECK(130e-6 / dwell < 2.0);
  CHECK(dwell / 130e-6 < 2.0);

  ChipLayout anchored = layout;
  anchored.anchor_fraction = 1.0;
  CHECK(phonon_dwell_time_s(anchored) == doctest::Approx(dwell / 5.0).epsilon(1e-9));
}

TEST_CASE("idle-window rate inversion") {
  CHECK(delta_gamma_from_occupation(std::exp(-1.0) * 0.9, 0.9, 10e-6) ==
        doctest::Approx(1e5).epsilon(1e-9));
  CHECK_THROWS_AS(delta_gamma_from_occupation(0.0, 0.9, 10e-6), std::invalid_argument);
}
