#pragma once

#include <span>

#include "mrsde/types.hpp"

namespace mrsde::stats {

/// P(N(0,1) >= x)
double normal_sf(double x);
double normal_pdf(double x);

struct Estimate {
  double mean = 0.0;
  double std_err = 0.0;
};

/// Mean and batch-means standard error of `values` split into `n_batches`
/// contiguous blocks.
Estimate batch_means(std::span<const double> values, Index n_batches);

/// Mean and standard error of a list of per-batch estimates.
Estimate mean_and_error(std::span<const double> batch_values);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic critical value c(alpha) sqrt((n + m) / (n m)).
double ks_critical(double alpha, Index n, Index m);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace mrsde::stats
