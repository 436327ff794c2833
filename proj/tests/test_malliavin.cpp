#include <cmath>
#include <random>

#include "doctest.h"
#include "mrsde/malliavin.hpp"
#include "mrsde/noise.hpp"
#include "mrsde/skeleton.hpp"
#include "oracles.hpp"

using namespace mrsde;

namespace {

ModelSpec free_model(CoefficientFn b, CoefficientFn sigma) {
  ModelSpec s;
  s.b = b;
  s.sigma = sigma;
  s.h = ConstraintFn::shifted_identity(50.0);
  return s;
}

ModelSpec ou() { return free_model(CoefficientFn::affine(0.0, -1.0), CoefficientFn::constant(1.0)); }

ModelSpec smooth() {
  ModelSpec s = free_model(CoefficientFn::sin_affine(-1.0, 0.5), CoefficientFn::sin_affine(0.0, 0.3, 1.0));
  s.h = ConstraintFn::sin_affine_monotone(2.0, 1.0);
  s.xi = 0.2;
  s.sigma_floor = 0.7;
  return s;
}

}  // namespace

TEST_CASE("Brownian kernel is one on and above the diagonal") {
  const ModelSpec spec = free_model(CoefficientFn::constant(0.0), CoefficientFn::constant(1.0));
  const TimeGrid grid(1.0, 50);
  const TangentBundle b = tangent_simulate(spec, grid, VectorXd::Zero(51), 3);
  const MalliavinKernel k = kernel_product(b);
  for (Index j = 0; j <= 50; ++j)
    for (Index t = 0; t <= 50; ++t) CHECK(k.d(j, t) == (t >= j ? 1.0 : 0.0));
}

TEST_CASE("OU kernel decays like exp(-(t - r))") {
  const TimeGrid grid(1.0, 1000);
  const TangentBundle b = tangent_simulate(ou(), grid, VectorXd::Zero(1001), 4);
  const MalliavinKernel k = kernel_product(b);
  double err = 0.0;
  for (Index j = 0; j <= 1000; j += 10)
    for (Index t = j; t <= 1000; t += 10)
      err = std::max(err, std::abs(k.d(j, t) - std::exp(-(grid.node(t) - grid.node(j)))));
  CHECK(err <= 1e-2);
  CHECK(std::abs(malliavin_covariance(k, 1000) - (1.0 - std::exp(-2.0)) / 2.0) <= 1e-2);
}

TEST_CASE("Y Z stays close to one") {
  const TimeGrid grid(1.0, 1000);
  const ModelSpec spec = smooth();
  const VectorXd k = frozen_reflection(spec, grid, 200, 1);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TangentBundle b = tangent_simulate(spec, grid, k, seed);
    total += (b.y.array() * b.z.array() - 1.0).abs().maxCoeff();
  }
  CHECK(total / 10 <= 0.02);
}

TEST_CASE("product formula agrees with the direct linear solve") {
  const TimeGrid grid(1.0, 400);
  const ModelSpec spec = smooth();
  const VectorXd k = frozen_reflection(spec, grid, 200, 2);
  const TangentBundle b = tangent_simulate(spec, grid, k, 7);
  const MalliavinKernel kp = kernel_product(b);
  const double bound = 5.0 * std::sqrt(grid.dt()) * (1.0 + kp.d.cwiseAbs().maxCoeff());
  for (Index r = 0; r <= 400; r += 40) {
    const VectorXd d = kernel_direct(spec, b, r);
    CHECK((d.transpose() - kp.d.row(r)).cwiseAbs().maxCoeff() <= bound);
    if (r > 0) CHECK(d.head(r).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(kernel_direct(spec, b, 401), std::out_of_range);
}

TEST_CASE("Cameron-Martin directional derivative") {
  const TimeGrid grid(1.0, 1000);
  const ModelSpec spec = smooth();
  const VectorXd k = frozen_reflection(spec, grid, 200, 3);
  const TangentBundle b = tangent_simulate(spec, grid, k, 11);
  VectorXd dir(1000);
  for (Index j = 0; j < 1000; ++j) dir[j] = std::cos(3.0 * grid.node(j));
  const CameronMartinReport r = cameron_martin_check(spec, b, ControlPath(grid, dir), 1e-4);
  CHECK(r.abs_error <= 1e-2);
  CHECK(std::isfinite(r.fd_derivative));
  CHECK_THROWS_AS(cameron_martin_check(spec, b, ControlPath(grid, dir), 0.0), std::invalid_argument);
}

TEST_CASE("covariance is positive under a sigma floor") {
  const TimeGrid grid(1.0, 200);
  const ModelSpec spec = smooth();
  const VectorXd k = frozen_reflection(spec, grid, 100, 5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MalliavinKernel kp = kernel_product(tangent_simulate(spec, grid, k, seed));
    for (Index t = 1; t <= 200; t += 37) CHECK(malliavin_covariance(kp, t) > 0.0);
  }
  CHECK(malliavin_covariance(kernel_product(tangent_simulate(spec, grid, k, 0)), 0) == 0.0);
}

TEST_CASE("frozen reflection at zero noise is the ODE reflection") {
  ModelSpec spec = free_model(CoefficientFn::constant(-1.0), CoefficientFn::constant(0.0));
  spec.h = ConstraintFn::identity();
  const TimeGrid grid(1.0, 100);
  CHECK(frozen_reflection(spec, grid, 10, 1) == solve_mr_ode(spec, grid).k);
}

TEST_CASE("density estimate: grid, mass and accuracy") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d(0.0, 1.0);
  VectorXd s(20000);
  for (Index i = 0; i < s.size(); ++i) s[i] = d(rng);
  const DensityGrid g = density_estimate(s, 0.1);
  REQUIRE(g.x.size() == kDensityPoints);
  CHECK(g.x[0] == doctest::Approx(s.minCoeff() - 0.3));
  CHECK(g.x[kDensityPoints - 1] == doctest::Approx(s.maxCoeff() + 0.3));
  CHECK(std::abs(trapezoid(g) - 1.0) <= 1e-3);
  for (Index i = 0; i < g.x.size(); ++i)
    CHECK(std::abs(g.f[i] - oracle::gaussian_pdf(g.x[i], 0.0, 1.0)) <= 0.03);
  CHECK_THROWS_AS(density_estimate(s.head(1), 0.1), std::invalid_argument);
  CHECK_THROWS_AS(density_estimate(s, 0.0), std::invalid_argument);
}

TEST_CASE("Picard iterates converge to the Euler path") {
  const TimeGrid grid(1.0, 200);
  const ModelSpec spec = smooth();
  const VectorXd k = frozen_reflection(spec, grid, 100, 6);
  const VectorXd e = picard_sup_errors(spec, tangent_simulate(spec, grid, k, 9), 12);
  CHECK(e[12] <= 1e-6);
  CHECK(e[12] < e[0]);
}
