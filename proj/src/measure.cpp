#include "mrsde/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mrsde/errors.hpp"

namespace mrsde {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("EmpiricalMeasure needs at least one atom");
  for (double a : atoms_)
    if (!std::isfinite(a)) throw std::invalid_argument("EmpiricalMeasure atoms must be finite");
  std::sort(atoms_.begin(), atoms_.end());
}

EmpiricalMeasure::EmpiricalMeasure(const ConstVectorRef& atoms)
    : EmpiricalMeasure(std::vector<double>(atoms.data(), atoms.data() + atoms.size())) {}

EmpiricalMeasure EmpiricalMeasure::dirac(double c, Index n) {
  return EmpiricalMeasure(std::vector<double>(static_cast<std::size_t>(n), c));
}

double EmpiricalMeasure::mean() const {
  double s = 0.0;
  for (double a : atoms_) s += a;
  return s / static_cast<double>(atoms_.size());
}

EmpiricalMeasure EmpiricalMeasure::shifted(double c) const {
  std::vector<double> moved(atoms_);
  for (double& a : moved) a += c;
  return EmpiricalMeasure(std::move(moved));
}

double h_mean(const ConstraintFn& h, double x, std::span<const double> atoms) {
  double s = 0.0;
  for (double a : atoms) s += h(x + a);
  return s / static_cast<double>(atoms.size());
}

double h_mean(const ConstraintFn& h, double x, const EmpiricalMeasure& nu) {
  return h_mean(h, x, nu.atoms());
}

double g0_above(const ConstraintFn& h, std::span<const double> atoms, double floor, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("g0 tolerance must be positive");
  if (!(floor >= 0.0)) throw std::invalid_argument("g0 floor must be nonnegative");
  if (atoms.empty()) throw std::invalid_argument("g0 needs at least one atom");

  double lo = floor;
  double h_lo = h_mean(h, lo, atoms);
  if (h_lo >= 0.0) return floor;

  // H(., nu) has slope in [m, M], so H(lo - H(lo)/m) >= 0. When rounding
  // leaves that end a hair below zero it becomes the new lower end, and the
  // next candidate carries a pad that doubles on each retry.
  double pad = 0.25 * tol * h.m() / h.M();
  double hi = lo - h_lo / h.m();
  double h_hi = h_mean(h, hi, atoms);
  int widen = 0;
  while (!(h_hi >= 0.0)) {
    if (++widen > 8 || !std::isfinite(hi))
      throw BracketFailure("g0: H(x, nu) did not change sign on the bisection bracket");
    lo = hi;
    h_lo = h_hi;
    hi = lo - h_lo / h.m() + pad;
    pad *= 2.0;
    h_hi = h_mean(h, hi, atoms);
  }

  // Either stop certifies 0 <= H(hi) <= tol m: the value test directly, the
  // width test through |H(hi)| <= M (hi - x*). Illinois false position,
  // with a bisection step whenever the interpolant stalls on one side.
  const double target_h = 0.5 * tol * h.m();
  const double target_width = 0.5 * tol * h.m() / h.M();
  double f_lo = h_lo, f_hi = h_hi;  // interpolation weights, halved by Illinois
  int side = 0;
  while (hi - lo > target_width && h_hi > target_h) {
    double mid = hi - f_hi * (hi - lo) / (f_hi - f_lo);
    if (!(mid > lo && mid < hi) || std::abs(side) > 2) {
      mid = lo + 0.5 * (hi - lo);
      side = 0;
    }
    if (mid <= lo || mid >= hi) break;
    const double h_mid = h_mean(h, mid, atoms);
    if (h_mid >= 0.0) {
      hi = mid;
      h_hi = f_hi = h_mid;
      if (side > 0) f_lo *= 0.5;
      side = side > 0 ? side + 1 : 1;
    } else {
      lo = mid;
      f_lo = h_mid;
      if (side < 0) f_hi *= 0.5;
      side = side < 0 ? side - 1 : -1;
    }
  }
  return hi;
}

double g0_above(const ConstraintFn& h, const EmpiricalMeasure& nu, double floor, double tol) {
  return g0_above(h, nu.atoms(), floor, tol);
}

double g0(const ConstraintFn& h, const EmpiricalMeasure& nu, double tol) {
  return g0_above(h, nu, 0.0, tol);
}

double w1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.size() != nu.size())
    throw std::invalid_argument("w1 needs equal-size clouds");
  const auto a = mu.atoms();
  const auto b = nu.atoms();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace mrsde
