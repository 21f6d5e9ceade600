// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

namespace driftguard {

/// Gaussian density with mean mu and standard deviation sigma > 0.
double normal_pdf(double x, double mu, double sigma);

/// log of normal_pdf; safe far into the tails.
double normal_log_pdf(double x, double mu, double sigma);

/// Standard normal CDF via erfc.
double std_normal_cdf(double z);

/// Inverse standard normal CDF for p in (0, 1). Rational approximation
/// refined with one Halley step against the erfc-based CDF; accurate to
/// near full double precision.
double std_normal_quantile(double p);

/// Trapezoidal integral of ys over the (not necessarily uniform) xs.
double trapezoid(std::span<const double> xs, std::span<const double> ys);

/// Linear-interpolation quantile (type 7) of an ascending-sorted
/// sequence, p in [0, 1].
double sorted_quantile(std::span<const double> sorted, double p);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n-1 denominator)
};

MeanSd mean_sd(std::span<const double> xs);

}  // namespace driftguard
