#pragma once

#include <span>
#include <vector>

#include "mrsde/model.hpp"
#include "mrsde/types.hpp"

namespace mrsde {

/// Equal-weight atom cloud on the real line, atoms kept sorted.
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(std::vector<double> atoms);
  explicit EmpiricalMeasure(const ConstVectorRef& atoms);

  /// n copies of the point c, standing for the Dirac mass at c.
  static EmpiricalMeasure dirac(double c, Index n = 1);

  Index size() const { return static_cast<Index>(atoms_.size()); }
  std::span<const double> atoms() const { return atoms_; }
  double mean() const;
  EmpiricalMeasure shifted(double c) const;

 private:
  std::vector<double> atoms_;
};

/// H(x, nu) = (1/n) sum_i h(x + atom_i), summed in ascending atom order.
double h_mean(const ConstraintFn& h, double x, const EmpiricalMeasure& nu);

/// G0(nu) = inf{x >= 0 : H(x, nu) >= 0}. The returned point satisfies
/// 0 <= H(x*, nu) <= tol * m whenever x* > 0.
double g0(const ConstraintFn& h, const EmpiricalMeasure& nu, double tol = kDefaultG0Tol);

/// max(floor, G0(nu)) for floor >= 0, bisecting only above the floor.
/// This is the running-sup update K <- max(K, G0(nu)).
double g0_above(const ConstraintFn& h, const EmpiricalMeasure& nu, double floor,
                double tol = kDefaultG0Tol);

/// The same two quantities on a raw cloud, summed in the order given. The
/// particle scheme calls these on its state vector to skip the sort.
double h_mean(const ConstraintFn& h, double x, std::span<const double> atoms);
double g0_above(const ConstraintFn& h, std::span<const double> atoms, double floor,
                double tol = kDefaultG0Tol);

/// Exact W1 between equal-size equal-weight clouds: mean |sorted differences|.
double w1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

}  // namespace mrsde
