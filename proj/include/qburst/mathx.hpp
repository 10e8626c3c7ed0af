#pragma once

namespace qburst {

// Scaled complementary error function exp(x^2) erfc(x). Accurate to better
// than 1e-13 relative over the full double range; needed because the bare
// product overflows long before erfc underflows.
double erfcx(double x);

}  // namespace qburst
