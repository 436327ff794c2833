#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's root finders, transport code or optimizers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

namespace oracle {

/// inf{x >= 0 : mean_i h(x + a_i) >= 0} by plain bisection to `tol`, summing
/// in long double.
inline double g0_bisection(const std::function<double(double)>& h, const std::vector<double>& atoms,
                           double tol = 1e-12) {
  auto H = [&](double x) {
    long double s = 0.0L;
    for (double a : atoms) s += h(x + a);
    return static_cast<double>(s / atoms.size());
  };
  if (H(0.0) >= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (H(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (H(mid) >= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

/// W1 between equal-weight clouds of equal size n by enumerating the
/// vertices of the transport polytope (the n! permutations). Small n only.
inline double w1_transport_enumeration(const std::vector<double>& a, std::vector<double> b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) cost += std::abs(a[i] - b[perm[i]]);
    best = std::min(best, cost / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// min and max of a derivative over a uniform grid.
struct Range {
  double lo;
  double hi;
};
inline Range derivative_range(const std::function<double(double)>& df, double a, double b,
                              int n = 200001) {
  Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < n; ++i) {
    const double v = df(a + (b - a) * i / (n - 1));
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  }
  return r;
}

/// Catalan's constant.
inline constexpr double kCatalan = 0.915965594177219015054603514932384110774;

/// -zeta(1/2) / sqrt(2 pi): the Broadie-Glasserman-Kou shift between
/// continuous and discretely monitored Brownian maxima.
inline constexpr double kBgkBeta = 0.5825971579390106;

/// E[max_k |B_{t_k}|^2] on a grid of step dt over [0, 1]: the continuous
/// value 2G with the discrete-monitoring shift of the running maximum of
/// |B| taken to second order in sqrt(dt).
inline double discrete_sup_sq_brownian(double dt) {
  const double e_sup = std::sqrt(std::numbers::pi / 2.0);  // E sup_{t<=1} |B_t|
  const double s = kBgkBeta * std::sqrt(dt);
  return 2.0 * kCatalan - 2.0 * s * e_sup + s * s;
}

/// Minimum of (1/2) sum phi_j^2 dt subject to y_n = target in the Euler
/// recursion y_{j+1} = y_j + (a0 + a1 y_j) dt + s phi_j dt, y_0 = xi. The
/// terminal value is affine in phi, so the minimum is closed form.
inline double linear_terminal_energy(double xi, double a0, double a1, double s, double horizon,
                                     int n, double target) {
  const double dt = horizon / n;
  double y = xi;
  for (int j = 0; j < n; ++j) y += (a0 + a1 * y) * dt;
  double weight_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = s * dt * std::pow(1.0 + a1 * dt, n - 1 - j);
    weight_sq += w * w;
  }
  const double r = target - y;
  return 0.5 * r * r * dt / weight_sq;
}

/// P(N(0, variance) >= a)
inline double gaussian_tail(double a, double variance) {
  return 0.5 * std::erfc(a / std::sqrt(2.0 * variance));
}

inline double gaussian_pdf(double x, double mean, double variance) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / variance) /
         std::sqrt(2.0 * std::numbers::pi * variance);
}

}  // namespace oracle
