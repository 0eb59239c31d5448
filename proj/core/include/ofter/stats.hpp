#pragma once

#include <span>
#include <vector>

namespace ofter::stats {

double mean(std::span<const double> x);

// Sample (N-1) standard deviation.
double sample_sd(std::span<const double> x);

// Pearson correlation; throws ofter::Error when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);

// Median; the mean of the two middle values for even sizes.
double median(std::span<const double> x);

// Linear-interpolation quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::span<const double> x, double q);

double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace ofter::stats
