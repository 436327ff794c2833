#include "mrsde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mrsde::stats {

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

Estimate mean_and_error(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean_and_error: empty input");
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

Estimate batch_means(std::span<const double> values, Index n_batches) {
  const Index n = static_cast<Index>(values.size());
  if (n_batches < 1 || n < n_batches)
    throw std::invalid_argument("batch_means: need at least one value per batch");
  std::vector<double> means(static_cast<std::size_t>(n_batches));
  for (Index b = 0; b < n_batches; ++b) {
    const Index begin = n * b / n_batches;
    const Index end = n * (b + 1) / n_batches;
    double s = 0.0;
    for (Index i = begin; i < end; ++i) s += values[static_cast<std::size_t>(i)];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(end - begin);
  }
  // Unequal block sizes differ by at most one element; the plain mean of
  // values is reported and the spread of block means gives the error.
  double total = 0.0;
  for (double x : values) total += x;
  return {total / static_cast<double>(n), mean_and_error(means).std_err};
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical(double alpha, Index n, Index m) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope needs two or more matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mrsde::stats
