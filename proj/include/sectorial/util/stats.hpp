#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sectorial::util {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;  // 0 when fewer than three points
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);  // unbiased
// Linear-interpolation quantile (type 7); q in [0, 1].
double quantile(std::vector<double> v, double q);
double median(std::vector<double> v);

struct Interval95 {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap interval for the mean of `v`.
Interval95 bootstrap_mean_ci(std::span<const double> v, int resamples, std::uint64_t seed,
                             std::uint64_t stream);

}  // namespace sectorial::util
