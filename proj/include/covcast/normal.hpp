#pragma once

namespace covcast {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF for p in (0, 1). Acklam's rational
/// approximation refined by one Halley step; absolute error near 1e-15.
double normal_quantile(double p);

} // namespace covcast
