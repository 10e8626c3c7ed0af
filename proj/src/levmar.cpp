#include "qburst/levmar.hpp"

#include <cmath>
#include <stdexcept>

namespace qburst {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

// Solve (A + lambda diag(A)) dx = b for small dense symmetric A, in place
// Gaussian elimination with partial pivoting.
bool solve_damped(std::vector<double> a, std::vector<double> b, double lambda, int n,
                  std::vector<double>& dx) {
  for (int i = 0; i < n; ++i) a[i * n + i] *= (1.0 + lambda);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  dx.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * dx[c];
    dx[r] = s / a[r * n + r];
  }
  return true;
}

}  // namespace

LevMarResult levmar_fit(const std::function<std::vector<double>(const std::vector<double>&)>& residuals,
                        std::vector<double> p, const LevMarOptions& opts) {
  const int np = static_cast<int>(p.size());
  LevMarResult out;
  std::vector<double> r = residuals(p);
  const int nd = static_cast<int>(r.size());
  if (nd < np) throw std::invalid_argument("levmar_fit: fewer data points than parameters");

  double chi2 = norm2(r);
  double lambda = opts.initial_lambda;
  out.residual_trace.push_back(std::sqrt(chi2));

  std::vector<double> jac(static_cast<std::size_t>(nd) * np);
  std::vector<double> jtj(static_cast<std::size_t>(np) * np);
  std::vector<double> jtr(np);
  std::vector<double> dx;

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    // forward-difference Jacobian
    for (int j = 0; j < np; ++j) {
      const double h = opts.fd_step * std::max(1.0, std::abs(p[j]));
      std::vector<double> pj = p;
      pj[j] += h;
      const std::vector<double> rj = residuals(pj);
      for (int i = 0; i < nd; ++i) jac[static_cast<std::size_t>(i) * np + j] = (rj[i] - r[i]) / h;
    }
    for (int a = 0; a < np; ++a) {
      jtr[a] = 0;
      for (int b = a; b < np; ++b) {
        double s = 0;
        for (int i = 0; i < nd; ++i) {
          s += jac[static_cast<std::size_t>(i) * np + a] * jac[static_cast<std::size_t>(i) * np + b];
        }
        jtj[static_cast<std::size_t>(a) * np + b] = s;
        jtj[static_cast<std::size_t>(b) * np + a] = s;
      }
      for (int i = 0; i < nd; ++i) {
        jtr[a] -= jac[static_cast<std::size_t>(i) * np + a] * r[i];
      }
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 32; ++attempt) {
      if (!solve_damped(jtj, jtr, lambda, np, dx)) {
        lambda *= 10;
        continue;
      }
      std::vector<double> pn = p;
      for (int j = 0; j < np; ++j) pn[j] += dx[j];
      const std::vector<double> rn = residuals(pn);
      const double chin = norm2(rn);
      if (std::isfinite(chin) && chin <= chi2) {
        double rel_step = 0;
        for (int j = 0; j < np; ++j) {
          rel_step = std::max(rel_step, std::abs(dx[j]) / std::max(1.0, std::abs(p[j])));
        }
        p = pn;
        r = rn;
        chi2 = chin;
        lambda = std::max(lambda * 0.3, 1e-12);
        out.residual_trace.push_back(std::sqrt(chi2));
        accepted = true;
        if (rel_step < opts.step_tolerance) {
          out.converged = true;
        }
        break;
      }
      lambda *= 10;
      if (lambda > 1e12) break;
    }
    if (!accepted) {
      // stuck: damping exhausted, treat current point as converged-or-failed
      out.converged = out.converged || (out.residual_trace.size() > 1);
      break;
    }
    if (out.converged) break;
  }

  // parameter covariance from undamped J^T J
  out.param_se.assign(np, 0.0);
  const double dof = std::max(1, nd - np);
  const double s2 = chi2 / dof;
  // invert jtj via solves against unit vectors
  for (int j = 0; j < np; ++j) {
    std::vector<double> e(np, 0.0);
    e[j] = 1.0;
    if (solve_damped(jtj, e, 0.0, np, dx) && dx[j] > 0) {
      out.param_se[j] = std::sqrt(dx[j] * s2);
    }
  }
  out.params = p;
  out.residual_norm = std::sqrt(chi2);
  out.iterations = iter + 1;
  return out;
}

}  // namespace qburst
