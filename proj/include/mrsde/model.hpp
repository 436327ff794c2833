#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mrsde {

enum class CoefficientKind { constant, affine, sin_affine, saturated_linear };
enum class ConstraintKind { identity, shifted_identity, affine, sin_affine_monotone };

std::string_view to_string(CoefficientKind kind);
std::string_view to_string(ConstraintKind kind);
CoefficientKind parse_coefficient_kind(std::string_view name);
ConstraintKind parse_constraint_kind(std::string_view name);

/// Closed parametric family used for the drift b and the diffusion sigma.
///
///   constant          f(x) = a
///   affine            f(x) = a + b x
///   sin-affine        f(x) = a x + c sin(x) [+ d]
///   saturated-linear  f(x) = a tanh(b x)    [+ d]
///
/// The trailing offset d is optional. The Lipschitz bound is the exact
/// supremum of |f'| for the family, declared rather than estimated.
class CoefficientFn {
 public:
  CoefficientFn() : CoefficientFn(CoefficientKind::constant, {0.0}) {}
  CoefficientFn(CoefficientKind kind, std::vector<double> params);

  static CoefficientFn constant(double a) { return {CoefficientKind::constant, {a}}; }
  static CoefficientFn affine(double a, double b) { return {CoefficientKind::affine, {a, b}}; }
  static CoefficientFn sin_affine(double a, double c, double d = 0.0) {
    return {CoefficientKind::sin_affine, {a, c, d}};
  }
  static CoefficientFn saturated_linear(double a, double b, double d = 0.0) {
    return {CoefficientKind::saturated_linear, {a, b, d}};
  }

  double operator()(double x) const;
  double derivative(double x) const;

  CoefficientKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  double lipschitz_bound() const { return lipschitz_; }

  /// Upper bound of |f| on [lo, hi] (sampled maximum plus Lipschitz slack).
  double abs_bound_on(double lo, double hi) const;

  /// True when f is identically zero.
  bool is_zero() const;

 private:
  CoefficientKind kind_;
  std::vector<double> params_;
  double p0_ = 0, p1_ = 0, p2_ = 0;
  double lipschitz_ = 0;
};

/// Strictly increasing bi-Lipschitz constraint function h with
/// m|x-y| <= |h(x)-h(y)| <= M|x-y| and unique root r*.
///
///   identity             h(x) = x
///   shifted-identity     h(x) = x + s
///   affine               h(x) = a + b x,            b > 0
///   sin-affine-monotone  h(x) = a x + c sin(x) [+ s], a > |c|
class ConstraintFn {
 public:
  ConstraintFn() : ConstraintFn(ConstraintKind::identity, {}) {}
  ConstraintFn(ConstraintKind kind, std::vector<double> params);

  static ConstraintFn identity() { return {ConstraintKind::identity, {}}; }
  static ConstraintFn shifted_identity(double s) { return {ConstraintKind::shifted_identity, {s}}; }
  static ConstraintFn affine(double a, double b) { return {ConstraintKind::affine, {a, b}}; }
  static ConstraintFn sin_affine_monotone(double a, double c, double s = 0.0) {
    return {ConstraintKind::sin_affine_monotone, {a, c, s}};
  }

  double operator()(double x) const;
  double derivative(double x) const;

  ConstraintKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  double m() const { return m_; }
  double M() const { return M_; }
  double root() const { return root_; }

 private:
  ConstraintKind kind_;
  std::vector<double> params_;
  double p0_ = 0, p1_ = 0, p2_ = 0;
  double m_ = 1, M_ = 1, root_ = 0;
};

/// Problem data: initial datum, horizon, coefficients, constraint and
/// the declared lower bound on |sigma| (0 when degeneracy is allowed).
struct ModelSpec {
  double xi = 0.0;
  double horizon = 1.0;
  CoefficientFn b;
  CoefficientFn sigma;
  ConstraintFn h;
  double sigma_floor = 0.0;
};

struct Violation {
  std::string invariant;
  std::string detail;
  std::vector<double> witness;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

struct ValidationOptions {
  int n_pairs = 10000;
  double sample_radius = 20.0;
  std::uint64_t seed = 0x5eed;
};

/// Randomized regularity checks. Violations are returned, never thrown.
ValidationReport validate(const ModelSpec& spec, const ValidationOptions& options = {});
ValidationReport validate(const CoefficientFn& f, std::string_view name,
                          const ValidationOptions& options = {});
ValidationReport validate(const ConstraintFn& h, const ValidationOptions& options = {});

}  // namespace mrsde
