#include "mrsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mrsde {

namespace {

void require_arity(std::string_view family, const std::vector<double>& params, std::size_t lo,
                   std::size_t hi) {
  if (params.size() < lo || params.size() > hi) {
    std::ostringstream os;
    os << family << " expects " << lo;
    if (hi != lo) os << ".." << hi;
    os << " parameters, got " << params.size();
    throw std::invalid_argument(os.str());
  }
  for (double p : params)
    if (!std::isfinite(p)) throw std::invalid_argument(std::string(family) + ": non-finite parameter");
}

double param_or(const std::vector<double>& p, std::size_t i, double fallback) {
  return i < p.size() ? p[i] : fallback;
}

}  // namespace

std::string_view to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::constant: return "constant";
    case CoefficientKind::affine: return "affine";
    case CoefficientKind::sin_affine: return "sin-affine";
    case CoefficientKind::saturated_linear: return "saturated-linear";
  }
  return "?";
}

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::identity: return "identity";
    case ConstraintKind::shifted_identity: return "shifted-identity";
    case ConstraintKind::affine: return "affine";
    case ConstraintKind::sin_affine_monotone: return "sin-affine-monotone";
  }
  return "?";
}

CoefficientKind parse_coefficient_kind(std::string_view name) {
  for (auto k : {CoefficientKind::constant, CoefficientKind::affine, CoefficientKind::sin_affine,
                 CoefficientKind::saturated_linear})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown coefficient kind '" + std::string(name) + "'");
}

ConstraintKind parse_constraint_kind(std::string_view name) {
  for (auto k : {ConstraintKind::identity, ConstraintKind::shifted_identity, ConstraintKind::affine,
                 ConstraintKind::sin_affine_monotone})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown constraint kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// CoefficientFn

CoefficientFn::CoefficientFn(CoefficientKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {
  switch (kind_) {
    case CoefficientKind::constant:
      require_arity("constant", params_, 1, 1);
      p0_ = params_[0];
      lipschitz_ = 0.0;
      break;
    case CoefficientKind::affine:
      require_arity("affine", params_, 2, 2);
      p0_ = params_[0];
      p1_ = params_[1];
      lipschitz_ = std::abs(p1_);
      break;
    case CoefficientKind::sin_affine:
      require_arity("sin-affine", params_, 2, 3);
      p0_ = params_[0];
      p1_ = params_[1];
      p2_ = param_or(params_, 2, 0.0);
      lipschitz_ = std::abs(p0_) + std::abs(p1_);
      break;
    case CoefficientKind::saturated_linear:
      require_arity("saturated-linear", params_, 2, 3);
      p0_ = params_[0];
      p1_ = params_[1];
      p2_ = param_or(params_, 2, 0.0);
      lipschitz_ = std::abs(p0_ * p1_);
      break;
  }
}

double CoefficientFn::operator()(double x) const {
  switch (kind_) {
    case CoefficientKind::constant: return p0_;
    case CoefficientKind::affine: return p0_ + p1_ * x;
    case CoefficientKind::sin_affine: return p0_ * x + p1_ * std::sin(x) + p2_;
    case CoefficientKind::saturated_linear: return p0_ * std::tanh(p1_ * x) + p2_;
  }
  return 0.0;
}

double CoefficientFn::derivative(double x) const {
  switch (kind_) {
    case CoefficientKind::constant: return 0.0;
    case CoefficientKind::affine: return p1_;
    case CoefficientKind::sin_affine: return p0_ + p1_ * std::cos(x);
    case CoefficientKind::saturated_linear: {
      const double th = std::tanh(p1_ * x);
      return p0_ * p1_ * (1.0 - th * th);
    }
  }
  return 0.0;
}

double CoefficientFn::abs_bound_on(double lo, double hi) const {
  if (hi < lo) std::swap(lo, hi);
  constexpr int kSamples = 256;
  const double step = (hi - lo) / kSamples;
  double best = 0.0;
  for (int i = 0; i <= kSamples; ++i) best = std::max(best, std::abs((*this)(lo + i * step)));
  return best + 0.5 * lipschitz_ * step;
}

bool CoefficientFn::is_zero() const {
  switch (kind_) {
    case CoefficientKind::constant: return p0_ == 0.0;
    case CoefficientKind::affine: return p0_ == 0.0 && p1_ == 0.0;
    case CoefficientKind::sin_affine: return p0_ == 0.0 && p1_ == 0.0 && p2_ == 0.0;
    case CoefficientKind::saturated_linear: return (p0_ == 0.0 || p1_ == 0.0) && p2_ == 0.0;
  }
  return false;
}

// ---------------------------------------------------------------------------
// ConstraintFn

ConstraintFn::ConstraintFn(ConstraintKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {
  switch (kind_) {
    case ConstraintKind::identity:
      require_arity("identity", params_, 0, 0);
      m_ = M_ = 1.0;
      root_ = 0.0;
      break;
    case ConstraintKind::shifted_identity:
      require_arity("shifted-identity", params_, 1, 1);
      p0_ = params_[0];
      m_ = M_ = 1.0;
      root_ = -p0_;
      break;
    case ConstraintKind::affine:
      require_arity("affine", params_, 2, 2);
      p0_ = params_[0];
      p1_ = params_[1];
      if (!(p1_ > 0.0)) throw std::invalid_argument("affine constraint needs slope b > 0");
      m_ = M_ = p1_;
      root_ = -p0_ / p1_;
      break;
    case ConstraintKind::sin_affine_monotone: {
      require_arity("sin-affine-monotone", params_, 2, 3);
      p0_ = params_[0];
      p1_ = params_[1];
      p2_ = param_or(params_, 2, 0.0);
      if (!(p0_ > std::abs(p1_)))
        throw std::invalid_argument("sin-affine-monotone constraint needs a > |b|");
      m_ = p0_ - std::abs(p1_);
      M_ = p0_ + std::abs(p1_);
      // h(lo) <= 0 <= h(hi) on this bracket.
      double lo = (-p2_ - std::abs(p1_)) / p0_;
      double hi = (-p2_ + std::abs(p1_)) / p0_;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ((*this)(mid) < 0.0 ? lo : hi) = mid;
      }
      root_ = std::abs((*this)(lo)) < std::abs((*this)(hi)) ? lo : hi;
      break;
    }
  }
}

double ConstraintFn::operator()(double x) const {
  switch (kind_) {
    case ConstraintKind::identity: return x;
    case ConstraintKind::shifted_identity: return x + p0_;
    case ConstraintKind::affine: return p0_ + p1_ * x;
    case ConstraintKind::sin_affine_monotone: return p0_ * x + p1_ * std::sin(x) + p2_;
  }
  return 0.0;
}

double ConstraintFn::derivative(double x) const {
  switch (kind_) {
    case ConstraintKind::identity:
    case ConstraintKind::shifted_identity: return 1.0;
    case ConstraintKind::affine: return p1_;
    case ConstraintKind::sin_affine_monotone: return p0_ + p1_ * std::cos(x);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// validation

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    if (&v != &violations.front()) os << "; ";
    os << v.invariant;
    if (!v.detail.empty()) os << ": " << v.detail;
    if (!v.witness.empty()) {
      os << " [witness";
      for (double w : v.witness) os << ' ' << w;
      os << ']';
    }
  }
  return os.str();
}

namespace {

constexpr double kRelSlack = 1e-9;
constexpr double kAbsSlack = 1e-12;

// Cancellation error of f(x) - f(y) when both values are large.
double rounding(double fx, double fy) {
  return 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(fx) + std::abs(fy));
}

struct PairSampler {
  explicit PairSampler(const ValidationOptions& o) : rng(o.seed), radius(o.sample_radius) {}

  std::pair<double, double> next() {
    std::uniform_real_distribution<double> pos(-radius, radius);
    std::uniform_real_distribution<double> log_gap(std::log(1e-6), std::log(2.0 * radius));
    const double x = pos(rng);
    double gap = std::exp(log_gap(rng));
    if (rng() & 1u) gap = -gap;
    return {x, x + gap};
  }

  std::mt19937_64 rng;
  double radius;
};

void append(ValidationReport& into, const ValidationReport& from) {
  into.violations.insert(into.violations.end(), from.violations.begin(), from.violations.end());
}

}  // namespace

ValidationReport validate(const CoefficientFn& f, std::string_view name,
                          const ValidationOptions& options) {
  ValidationReport report;
  PairSampler sampler(options);
  const double lip = f.lipschitz_bound();
  for (int n = 0; n < options.n_pairs; ++n) {
    const auto [x, y] = sampler.next();
    const double fx = f(x), fy = f(y);
    const double lhs = std::abs(fx - fy);
    const double rhs = lip * std::abs(x - y);
    if (lhs > rhs * (1.0 + kRelSlack) + kAbsSlack + rounding(fx, fy)) {
      report.violations.push_back({std::string(name) + " Lipschitz bound fails",
                                   "|f(x)-f(y)| exceeds lipschitz_bound*|x-y|", {x, y}});
      break;
    }
  }
  return report;
}

ValidationReport validate(const ConstraintFn& h, const ValidationOptions& options) {
  ValidationReport report;
  PairSampler sampler(options);
  bool monotone_ok = true, lower_ok = true, upper_ok = true;
  for (int n = 0; n < options.n_pairs; ++n) {
    auto [x, y] = sampler.next();
    if (x > y) std::swap(x, y);
    const double hx = h(x), hy = h(y);
    const double dh = hy - hx;
    const double dx = y - x;
    const double slack = kAbsSlack + rounding(hx, hy);
    if (monotone_ok && !(dh > 0.0)) {
      report.violations.push_back({"h strictly increasing fails", "h(x) >= h(y) with x < y", {x, y}});
      monotone_ok = false;
    }
    if (lower_ok && std::abs(dh) < h.m() * dx * (1.0 - kRelSlack) - slack) {
      report.violations.push_back({"h lower Lipschitz bound fails", "|h(x)-h(y)| < m|x-y|", {x, y}});
      lower_ok = false;
    }
    if (upper_ok && std::abs(dh) > h.M() * dx * (1.0 + kRelSlack) + slack) {
      report.violations.push_back({"h upper Lipschitz bound fails", "|h(x)-h(y)| > M|x-y|", {x, y}});
      upper_ok = false;
    }
  }
  if (!(h.m() > 0.0) || h.M() < h.m())
    report.violations.push_back({"0 < m <= M fails", "", {h.m(), h.M()}});
  if (!(std::abs(h(h.root())) <= 1e-12))
    report.violations.push_back({"h(root) = 0 fails", "", {h.root(), h(h.root())}});
  return report;
}

ValidationReport validate(const ModelSpec& spec, const ValidationOptions& options) {
  ValidationReport report;
  if (!std::isfinite(spec.xi))
    report.violations.push_back({"xi finite fails", "", {spec.xi}});
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon))
    report.violations.push_back({"horizon T > 0 fails", "", {spec.horizon}});
  if (!(spec.sigma_floor >= 0.0))
    report.violations.push_back({"sigma_floor >= 0 fails", "", {spec.sigma_floor}});

  append(report, validate(spec.b, "b", options));
  append(report, validate(spec.sigma, "sigma", options));
  append(report, validate(spec.h, options));

  if (std::isfinite(spec.xi) && !(spec.h(spec.xi) >= 0.0))
    report.violations.push_back(
        {"h(xi) >= 0 fails", "the initial datum must satisfy the constraint", {spec.xi, spec.h(spec.xi)}});

  if (spec.sigma_floor > 0.0) {
    constexpr int kGrid = 10000;
    const double r = options.sample_radius + (std::isfinite(spec.xi) ? std::abs(spec.xi) : 0.0);
    for (int i = 0; i <= kGrid; ++i) {
      const double x = -r + 2.0 * r * i / kGrid;
      if (std::abs(spec.sigma(x)) < spec.sigma_floor * (1.0 - 1e-12)) {
        report.violations.push_back(
            {"|sigma(x)| >= sigma_floor fails", "", {x, spec.sigma(x), spec.sigma_floor}});
        break;
      }
    }
  }
  return report;
}

}  // namespace mrsde
