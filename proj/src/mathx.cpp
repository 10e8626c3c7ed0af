#include "qburst/mathx.hpp"

#include <cmath>

namespace qburst {

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) {
    // erfcx(-x) = 2 exp(x^2) - erfcx(x); overflows to +inf for x << -26
    const double e = std::exp(x * x);
    return 2.0 * e - erfcx(-x);
  }
  if (x <= 12.0) {
    // exp and erfc are both well scaled here
    return std::exp(x * x) * std::erfc(x);
  }
  // asymptotic series: erfcx(x) ~ (1/(x sqrt(pi))) sum_k (-1)^k (2k-1)!!/(2x^2)^k
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -static_cast<double>(2 * k - 1) * inv2x2;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum / (x * std::sqrt(M_PI));
}

}  // namespace qburst
