#pragma once

#include <functional>
#include <vector>

namespace qburst {

struct LevMarOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-8;   // relative parameter step
  double initial_lambda = 1e-3;
  double fd_step = 1e-6;          // relative forward-difference step
};

struct LevMarResult {
  std::vector<double> params;
  std::vector<double> param_se;       // from (J^T J)^-1 scaled by residual variance
  std::vector<double> residual_trace; // residual norm per accepted iteration
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped least squares on r(p); r returns one residual per data point.
LevMarResult levmar_fit(const std::function<std::vector<double>(const std::vector<double>&)>& residuals,
                        std::vector<double> initial, const LevMarOptions& opts = {});

}  // namespace qburst
