#include "qburst/recovery.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qburst/levmar.hpp"
#include "qburst/mathx.hpp"
#include "qburst/units.hpp"

namespace qburst {

void RecoveryParams::validate() const {
  if (!(tau_s > 0) || !(sigma_s > 0)) throw std::invalid_argument("recovery: tau, sigma must be > 0");
  if (!(gap_ev > 0)) throw std::invalid_argument("recovery: gap must be > 0");
  if (!(omega01_rad_s > 0)) throw std::invalid_argument("recovery: omega01 must be > 0");
}

double dropout_curve(double t_s, const RecoveryParams& p) {
  const double tau = p.tau_s;
  const double sig = p.sigma_s;
  const double u = (sig * sig - tau * t_s) / (std::sqrt(2.0) * sig * tau);
  if (u >= 0.0) {
    // 0.5 exp(A) erfc(u) with A - u^2 = -t^2 / (2 sigma^2)
    return 0.5 * erfcx(u) * std::exp(-t_s * t_s / (2.0 * sig * sig));
  }
  const double a = (sig * sig - 2.0 * tau * t_s) / (2.0 * tau * tau);  // < 0 on this branch
  return 0.5 * std::exp(a) * std::erfc(u);
}

DropoutFit fit_dropout(const std::vector<DropoutSample>& samples, double tau_guess_s,
                       double sigma_guess_s) {
  if (samples.size() < 10) throw std::invalid_argument("fit_dropout: need at least 10 samples");
  if (!(tau_guess_s > 0) || !(sigma_guess_s > 0)) {
    throw std::invalid_argument("fit_dropout: guesses must be positive");
  }

  const auto residuals = [&samples](const std::vector<double>& logp) {
    RecoveryParams p;
    p.tau_s = std::exp(logp[0]);
    p.sigma_s = std::exp(logp[1]);
    std::vector<double> r(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      r[i] = dropout_curve(samples[i].t_s, p) - samples[i].occupation;
    }
    return r;
  };

  LevMarOptions opts;
  opts.step_tolerance = 1e-8;
  const LevMarResult res = levmar_fit(residuals, {std::log(tau_guess_s), std::log(sigma_guess_s)}, opts);

  DropoutFit fit;
  fit.tau_s = std::exp(res.params[0]);
  fit.sigma_s = std::exp(res.params[1]);
  // d tau / d log tau = tau
  fit.tau_se = fit.tau_s * res.param_se[0];
  fit.sigma_se = fit.sigma_s * res.param_se[1];
  fit.residual_norm = res.residual_norm;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  fit.residual_trace = res.residual_trace;

  // the recovery is unresolved when the fitted transient never turns over
  // inside the sampled window (flat or monotone input)
  const double span = std::abs(samples.back().t_s - samples.front().t_s);
  RecoveryParams fitted;
  fitted.tau_s = fit.tau_s;
  fitted.sigma_s = fit.sigma_s;
  double peak = -1, low = 2;
  for (const auto& s : samples) {
    const double v = dropout_curve(s.t_s, fitted);
    peak = std::max(peak, v);
    low = std::min(low, v);
  }
  fit.tau_unbounded = fit.tau_s > 100.0 * span || peak - low < 0.5 * peak;
  if (!res.converged && !fit.tau_unbounded) {
    std::ostringstream os;
    os << "fit_dropout did not converge after " << res.iterations
       << " iterations; residual trace:";
    for (double r : res.residual_trace) os << " " << r;
    throw std::runtime_error(os.str());
  }
  return fit;
}

double xqp_from_rate(double delta_gamma_per_s, const RecoveryParams& p) {
  if (delta_gamma_per_s < 0) throw std::invalid_argument("xqp_from_rate: rate must be >= 0");
  const double gap_j = p.gap_ev * units::ev;
  return M_PI * delta_gamma_per_s / std::sqrt(2.0 * gap_j * p.omega01_rad_s / units::hbar);
}

double rate_from_xqp(double x_qp, const RecoveryParams& p) {
  const double gap_j = p.gap_ev * units::ev;
  return x_qp / M_PI * std::sqrt(2.0 * gap_j * p.omega01_rad_s / units::hbar);
}

double phonon_dwell_time_s(const ChipLayout& layout) {
  layout.validate();
  const double x0_m = layout.substrate.side_x_um / units::um_per_m;
  const double z0_m = layout.substrate.thickness_um / units::um_per_m;
  return x0_m * x0_m / (layout.anchor_fraction * layout.substrate.sound_speed_m_s * z0_m);
}

std::vector<DropoutSample> simulate_dropout_experiment(const RecoveryParams& truth,
                                                       double t_start_s, double t_stop_s,
                                                       double step_s, int events_per_point,
                                                       RngStream& rng) {
  truth.validate();
  std::vector<DropoutSample> out;
  for (double t = t_start_s; t <= t_stop_s + 0.5 * step_s; t += step_s) {
    // average over triggered events: jittered onset, exponential suppression
    double acc = 0;
    for (int e = 0; e < events_per_point; ++e) {
      const double onset = truth.sigma_s * rng.normal();
      const double s = t > onset ? std::exp(-(t - onset) / truth.tau_s) : 0.0;
      acc += (rng.uniform() < s) ? 1.0 : 0.0;
    }
    out.push_back({t, acc / events_per_point});
  }
  return out;
}

double delta_gamma_from_occupation(double p1, double baseline_p1, double idle_s) {
  if (!(p1 > 0) || !(baseline_p1 > 0) || !(idle_s > 0)) {
    throw std::invalid_argument("delta_gamma_from_occupation: inputs must be positive");
  }
  return std::log(baseline_p1 / p1) / idle_s;
}

}  // namespace qburst
