// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier pipeline runs are shared between criteria; solved fields
// are cached under acceptance_cache/ so reruns are fast.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "qburst/config.hpp"
#include "qburst/mathx.hpp"
#include "qburst/pipeline.hpp"
#include "qburst/recovery.hpp"
#include "qburst/units.hpp"

using namespace qburst;

namespace {

int g_index = 0;
int g_failures = 0;

void criterion(const std::string& name, bool pass, const std::string& detail) {
  ++g_index;
  std::printf("[%2d] %s  %s  (%s)\n", g_index, pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

const PairSummary* pair_at(const RunResult& run, double separation_um) {
  const PairSummary* best = nullptr;
  double gap = 1e18;
  for (const auto& ps : run.pairs) {
    const double g = std::abs(ps.stats.separation_um - separation_um);
    if (g < gap) {
      gap = g;
      best = &ps;
    }
  }
  return best;
}

double exceedance_at(const RunResult& run, double separation_um, double level, bool phase) {
  for (const auto& pe : run.errors.pairs) {
    if (std::abs(pe.separation_um - separation_um) < 1.0) {
      for (const auto& pt : phase ? pe.phase : pe.bit) {
        if (std::abs(pt.level - level) < 1e-12) return pt.fraction;
      }
    }
  }
  return std::nan("");
}

SimulationConfig base_config() {
  SimulationConfig cfg;
  cfg.run.seed = 1;
  cfg.run.cache_dir = "acceptance_cache";
  cfg.source.rng_seed = cfg.run.seed;
  return cfg;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");

  // 1. charge dispersion
  {
    TransmonParams params;
    const double disp_hz = charge_dispersion_rad_s(params) / units::two_pi;
    criterion("charge dispersion 6.0 kHz within 2%", std::abs(disp_hz - 6000.0) / 6000.0 < 0.02,
              fmt("%.1f Hz", disp_hz));
  }

  // 2. fault-threshold table
  {
    const double p2 = fault_threshold(1e-2, 2);
    const double p3 = fault_threshold(1e-2, 3);
    criterion("fault thresholds p2 = 1e-4, p3 = 1e-6",
              std::abs(p2 / 1e-4 - 1.0) < 1e-12 && std::abs(p3 / 1e-6 - 1.0) < 1e-12,
              fmt("p2 = %.3e, p3 = %.3e", p2, p3));
  }

  // 3. coincidence-correction estimator
  {
    const double p_ab = corrected_joint_probability(0.055, 0.061, 0.027);
    const bool row_ok = std::abs(p_ab - 0.026) < 5e-4;

    const double pab_true = 0.02, pa_true = 0.03, pb_true = 0.035;
    RngStream rng(101, 0);
    const std::uint64_t n = 1000000;
    std::uint64_t na = 0, nb = 0, nab = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const bool corr = rng.uniform() < pab_true;
      const bool a = corr || rng.uniform() < pa_true;
      const bool b = corr || rng.uniform() < pb_true;
      na += a;
      nb += b;
      nab += a && b;
    }
    const double est = corrected_joint_probability(
        static_cast<double>(na) / n, static_cast<double>(nb) / n, static_cast<double>(nab) / n);
    const double se = 4.0 * std::sqrt(pab_true * (1 - pab_true) / n);
    criterion("coincidence estimator: reference row and synthetic round trip",
              row_ok && std::abs(est - pab_true) < se,
              fmt("row p_ab = %.6f; round trip %.6f vs truth %.6f", p_ab, est, pab_true));
  }

  // 4. weighting-field oracle (parallel plate at default z resolution)
  {
    ChipLayout layout;
    QubitGeometry plate;
    plate.id = "plate";
    plate.island_radius_um = 1e6;
    plate.cavity_radius_um = 2e6;
    layout.qubits.push_back(plate);
    GridSpec spec;
    spec.core_spacing_um = 40.0;
    spec.core_radius_um = 120.0;
    spec.stretch_ratio = 1.3;
    spec.half_width_um = 400.0;
    spec.vacuum_below_um = 0.0;
    spec.vacuum_above_um = 100.0;
    spec.tolerance = 1e-8;
    spec.lateral_bc = LateralBc::mirror;
    const WeightingGrid grid = solve_weighting(layout, "plate", spec);
    double worst = 0, worst_grad = 0;
    RngStream rng(7, 0);
    for (int i = 0; i < 100; ++i) {
      const double z = rng.uniform(10.0, 365.0);
      const Vec3 r{rng.uniform(-250.0, 250.0), rng.uniform(-250.0, 250.0), z};
      worst = std::max(worst, std::abs(grid.alpha_at(r) / (z / 375.0) - 1.0));
      if (z > 40.0 && z < 335.0) {
        const Vec3 g = grid.grad_alpha_at(r);
        const double h = 2.0;
        const double fd =
            (grid.alpha_at({r.x, r.y, r.z + h}) - grid.alpha_at({r.x, r.y, r.z - h})) / (2 * h);
        worst_grad = std::max(worst_grad, std::abs(g.z - fd) / std::abs(fd));
      }
    }
    criterion("weighting oracle: plate field linear within 2%, gradient consistent",
              worst < 0.02 && worst_grad < 0.02,
              fmt("max alpha error %.3f%%, max grad mismatch %.3f%%", 100 * worst,
                  100 * worst_grad));
  }

  // 5-8 share two pipeline runs
  std::printf("... running gamma pipeline (2e4 events)\n");
  SimulationConfig gamma_cfg = base_config();
  gamma_cfg.source.muon_rate_hz = 0.0;
  gamma_cfg.run.n_events = 20000;
  const RunResult gamma_run = run_simulation(gamma_cfg);
  std::printf("    gamma run took %.1f s\n", gamma_run.wall_seconds);

  std::printf("... running muon pipeline (4e3 events)\n");
  SimulationConfig muon_cfg = base_config();
  muon_cfg.source.gamma_rate_hz = 0.0;
  muon_cfg.run.n_events = 4000;
  const RunResult muon_run = run_simulation(muon_cfg);
  std::printf("    muon run took %.1f s\n", muon_run.wall_seconds);

  // 5. correlation probabilities
  {
    const PairSummary* p340 = pair_at(gamma_run, 340.0);
    const PairSummary* p640 = pair_at(gamma_run, 640.0);
    const PairSummary* p3195 = pair_at(gamma_run, 3195.0);
    const bool ok = std::abs(p340->stats.p_corr - 0.54) <= 0.10 &&
                    std::abs(p640->stats.p_corr - 0.46) <= 0.10 &&
                    std::abs(p3195->stats.p_corr - 0.0) <= 0.02;
    criterion("correlation probabilities 0.54/0.46/0.00 at 340/640/3195 um", ok,
              fmt("got %.3f / %.3f / %.3f", p340->stats.p_corr, p640->stats.p_corr,
                  p3195->stats.p_corr));
  }

  // 6. sign-level asymmetries
  {
    const PairSummary* p340 = pair_at(gamma_run, 340.0);
    const bool asym_ok = gamma_run.charge_asym && gamma_run.charge_asym->value > 0.5;
    const bool a13_ok = p340->asym_1324 && p340->asym_1324->value > 0.0;
    criterion("charge asymmetry > 0.5 and 13/24 asymmetry > 0 at 340 um", asym_ok && a13_ok,
              fmt("charge asym %.3f, 13/24 %.3f",
                  gamma_run.charge_asym ? gamma_run.charge_asym->value : -1.0,
                  p340->asym_1324 ? p340->asym_1324->value : -1.0));
  }

  // 7. phase-flip exceedance
  {
    const double g340 = exceedance_at(gamma_run, 340.0, 1e-6, true);
    const double g640 = exceedance_at(gamma_run, 640.0, 1e-6, true);
    const double m3195 = exceedance_at(muon_run, 3195.0, 1e-6, true);
    const bool ok = std::abs(g340 - 0.11) <= 0.03 && std::abs(g640 - 0.097) <= 0.03 &&
                    std::abs(m3195 - 0.072) <= 0.02;
    criterion("joint phase-flip exceedance at 1e-6: 11% / 9.7% (gamma), 7.2% (muon 3195 um)", ok,
              fmt("got %.1f%% / %.1f%% / %.1f%%", 100 * g340, 100 * g640, 100 * m3195));
  }

  // 8. bit-flip exceedance
  {
    const double g340 = exceedance_at(gamma_run, 340.0, 1e-8, false);
    const double g640 = exceedance_at(gamma_run, 640.0, 1e-8, false);
    const bool ok = std::abs(g340 - 0.012) <= 0.005 && std::abs(g640 - 0.007) <= 0.005;
    criterion("joint bit-flip exceedance at 1e-8: 1.2% / 0.7% (gamma)", ok,
              fmt("got %.2f%% / %.2f%%", 100 * g340, 100 * g640));
  }

  // 9. dropout model
  {
    RecoveryParams truth;
    const std::pair<double, double> fixtures[] = {
        {-800e-6, 5.0292150647992981e-5}, {-100e-6, 0.1451092203903152},
        {0.0, 0.19581472016943792},       {100e-6, 0.21748646414663974},
        {400e-6, 0.10433086235432852},    {1500e-6, 3.5937550762184528e-5},
    };
    double worst = 0;
    for (const auto& [t, want] : fixtures) {
      worst = std::max(worst, std::abs(dropout_curve(t, truth) - want));
    }
    RngStream rng(41, 0);
    const auto samples = simulate_dropout_experiment(truth, -600e-6, 1500e-6, 40e-6, 142, rng);
    const DropoutFit fit = fit_dropout(samples, 90e-6, 150e-6);
    const double tau_err = std::abs(fit.tau_s / truth.tau_s - 1.0);
    criterion("dropout curve matches fixtures to 1e-9; noisy fit recovers tau within 10%",
              worst < 1e-9 && tau_err < 0.10,
              fmt("max fixture error %.2e, tau error %.1f%%", worst, 100 * tau_err));
  }

  // 10. phonon dwell time
  {
    const double dwell = phonon_dwell_time_s(default_layout());
    const bool ok = std::abs(dwell - 86.8e-6) / 86.8e-6 < 1e-3 && dwell < 2e-4 &&
                    130e-6 / dwell < 2.0 && dwell / 130e-6 < 2.0;
    criterion("phonon dwell time 86.8 us, order 100 us, within 2x of tau", ok,
              fmt("%.2f us", dwell * 1e6));
  }

  // 11. calibration-free property suite
  {
    bool ok = true;
    std::string note = "all properties held";

    // aliasing algebra
    RngStream rng(51, 0);
    for (int i = 0; i < 500 && ok; ++i) {
      const double x = rng.uniform(-30.0, 30.0);
      const double a = alias_charge(x);
      if (a < -0.5 || a >= 0.5 || std::abs(std::remainder(x - a, 1.0)) > 1e-12) {
        ok = false;
        note = "aliasing algebra failed";
      }
    }
    // estimator identity in exact arithmetic
    {
      const double pab = 0.015, pa = 0.02, pb = 0.04;
      const double pa_o = pab + pa * (1 - pab);
      const double pb_o = pab + pb * (1 - pab);
      const double pab_o = pab + pa * pb * (1 - pab);
      if (std::abs(corrected_joint_probability(pa_o, pb_o, pab_o) - pab) > 1e-12) {
        ok = false;
        note = "estimator identity failed";
      }
    }
    // pdf mass conservation
    {
      const auto [e, h] = build_charge_pdf(TransportParams{}, Substrate{}, 20000, 5);
      for (int l = 0; l < e.layer_count() && ok; ++l) {
        if (std::abs(e.layer(l).inside + e.layer(l).escaped - 1.0) > 1e-9) {
          ok = false;
          note = "pdf mass conservation failed";
        }
      }
    }
    // transport isotropy/anisotropy
    {
      PairCreation pairs;
      for (int i = 0; i < 20000; ++i) pairs.pairs.push_back({{0, 0, 187.0}, 1.0});
      RngStream trng(52, 0, rng_salt::transport);
      const CarrierSet out = transport(pairs, TransportParams{}, Substrate{}, 0, trng);
      const auto axes = valley_axes(Substrate{});
      const double cone = std::cos(15.0 * M_PI / 180.0);
      double e_axial = 0, h_axial = 0, ne = 0, nh = 0;
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
        }
      }
      if (!(e_axial / ne > 2.0 * (h_axial / nh))) {
        ok = false;
        note = "valley anisotropy failed";
      }
    }
    // determinism through the full per-event pipeline
    {
      SimulationConfig cfg = base_config();
      cfg.grid.half_width_um = 500.0;
      cfg.grid.dz_substrate_um = 375.0 / 25.0;
      cfg.grid.stretch_ratio = 1.3;
      cfg.grid.tolerance = 1e-5;
      cfg.run.n_events = 100;
      cfg.run.cache_dir.clear();
      const PipelineContext ctx = PipelineContext::prepare(cfg);
      const auto events = sample_event_stream(cfg.source, cfg.layout.substrate, cfg.run.n_events);
      const auto a = process_events(cfg, ctx, events, false);
      const auto b = process_events(cfg, ctx, events, true);
      for (std::size_t i = 0; i < a.size() && ok; ++i) {
        for (std::size_t q = 0; q < a[i].per_qubit.size(); ++q) {
          if (a[i].per_qubit[q].dq_measured_e != b[i].per_qubit[q].dq_measured_e) {
            ok = false;
            note = "serial/parallel determinism failed";
          }
        }
      }
      // gradient finite-difference check on the solved field
      const WeightingGrid& grid = *ctx.grid_of_qubit[0];
      RngStream grng(53, 0);
      for (int i = 0; i < 20 && ok; ++i) {
        const Vec3 r{grng.uniform(-300, 300), grng.uniform(-300, 300), grng.uniform(50.0, 330.0)};
        const Vec3 g = grid.grad_alpha_at(r);
        const double h = 1.5;
        const Vec3 fd{
            (grid.alpha_at({r.x + h, r.y, r.z}) - grid.alpha_at({r.x - h, r.y, r.z})) / (2 * h),
            (grid.alpha_at({r.x, r.y + h, r.z}) - grid.alpha_at({r.x, r.y - h, r.z})) / (2 * h),
            (grid.alpha_at({r.x, r.y, r.z + h}) - grid.alpha_at({r.x, r.y, r.z - h})) / (2 * h)};
        if ((g - fd).norm() > 0.25 * std::max(1e-6, g.norm())) {
          ok = false;
          note = "gradient finite-difference check failed";
        }
      }
    }
    criterion("calibration-free property suite", ok, note);
  }

  std::printf("================\n%d criteria, %d failed\n", g_index, g_failures);
  return g_failures == 0 ? 0 : 1;
}
