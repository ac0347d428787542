#pragma once

namespace khan {

/// Standard normal CDF.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), computed without cancellation.
double normal_sf(double x);

double normal_pdf(double x);

/// Inverse of normal_cdf on (0,1); throws ConfigError outside the open interval.
double normal_quantile(double p);

}  // namespace khan
