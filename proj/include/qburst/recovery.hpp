#pragma once

#include <vector>

#include "qburst/geometry.hpp"
#include "qburst/rng.hpp"

namespace qburst {

struct RecoveryParams {
  double tau_s = 130e-6;     // recovery timescale
  double sigma_s = 210e-6;   // trigger-timing jitter
  double gap_ev = 190e-6;    // superconducting gap Delta
  double omega01_rad_s = 2.8274333882308138e10;  // 2 pi x 4.5 GHz

  void validate() const;
};

// Occupation transient after a burst trigger: a causal exponential recovery
// exp(-t/tau) convolved with a Gaussian timing jitter of width sigma.
// Evaluated through erfcx on the branch where the naive product
// exp(...) erfc(...) would overflow.
double dropout_curve(double t_s, const RecoveryParams& params);

struct DropoutFit {
  double tau_s = 0;
  double sigma_s = 0;
  double tau_se = 0;
  double sigma_se = 0;
  double residual_norm = 0;
  int iterations = 0;
  bool converged = false;
  bool tau_unbounded = false;  // flat input, recovery time not constrained
  std::vector<double> residual_trace;
};

struct DropoutSample {
  double t_s;
  double occupation;
};

// Nonlinear least squares for (tau, sigma); fits in log-space so both stay
// positive. Throws std::runtime_error carrying the residual trace on
// non-convergence.
DropoutFit fit_dropout(const std::vector<DropoutSample>& samples, double tau_guess_s,
                       double sigma_guess_s);

// Quasiparticle density <-> relaxation-rate shift,
// dGamma01 = (x_qp / pi) sqrt(2 Delta omega01 / hbar).
double xqp_from_rate(double delta_gamma_per_s, const RecoveryParams& params);
double rate_from_xqp(double x_qp, const RecoveryParams& params);

// Athermal-phonon dwell time x0^2 / (beta c_s z0), seconds.
double phonon_dwell_time_s(const ChipLayout& layout);

// Synthetic trigger-and-probe experiment: per detected burst the trigger
// time has Gaussian jitter, and each probe point averages `events_per_point`
// Bernoulli draws of the suppression amplitude. Produces fit fixtures with
// realistic binomial noise.
std::vector<DropoutSample> simulate_dropout_experiment(const RecoveryParams& truth,
                                                       double t_start_s, double t_stop_s,
                                                       double step_s, int events_per_point,
                                                       RngStream& rng);

// Relaxation-rate shift inferred from a suppressed idle-window occupation,
// Gamma = -ln(p1) / idle.
double delta_gamma_from_occupation(double p1, double baseline_p1, double idle_s);

}  // namespace qburst
