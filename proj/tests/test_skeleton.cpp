#include <cmath>

#include "doctest.h"
#include "mrsde/skeleton.hpp"

using namespace mrsde;

TEST_CASE("mean-reflected ODE on the closed-form instance sits on the constraint") {
  ModelSpec spec;
  spec.b = CoefficientFn::constant(-1.0);
  spec.sigma = CoefficientFn::constant(1.0);
  const TimeGrid grid(1.0, 1000);
  const DeterministicPath p = solve_mr_ode(spec, grid);
  for (Index k = 0; k < grid.n_nodes(); ++k) {
    CHECK(std::abs(p.x[k]) <= 1e-12);
    CHECK(p.k[k] == doctest::Approx(grid.node(k)).epsilon(1e-12));
  }
}

TEST_CASE("no reflection while the constraint is slack") {
  ModelSpec spec;
  spec.xi = 2.0;
  spec.b = CoefficientFn::constant(-1.0);
  const TimeGrid grid(3.0, 300);
  const DeterministicPath p = solve_mr_ode(spec, grid);
  // x = 2 - t until t = 2, then pinned at 0.
  CHECK(p.k[200] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.x[100] == doctest::Approx(1.0));
  CHECK(p.k[300] == doctest::Approx(1.0));
  CHECK(std::abs(p.x[300]) <= 1e-12);
}

TEST_CASE("skeleton with zero control and the ODE reflection is the ODE") {
  ModelSpec spec;
  spec.xi = 0.5;
  spec.b = CoefficientFn::sin_affine(-1.0, 0.5, -1.0);
  spec.sigma = CoefficientFn::constant(1.0);
  spec.h = ConstraintFn::sin_affine_monotone(2.0, 1.0);
  const TimeGrid grid(2.0, 400);
  const DeterministicPath ode = solve_mr_ode(spec, grid);
  const DeterministicPath sk = solve_skeleton(spec, grid, ControlPath::zero(grid), ode.k);
  CHECK((ode.x - sk.x).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(sk.k == ode.k);
}

TEST_CASE("short skeleton integrates sigma(y) phi") {
  ModelSpec spec;
  spec.xi = 0.25;
  spec.sigma = CoefficientFn::constant(2.0);
  spec.b = CoefficientFn::constant(100.0);
  const TimeGrid grid(1.0, 50);
  const DeterministicPath p = solve_short_skeleton(spec, grid, ControlPath::constant(grid, 0.5));
  CHECK(p.x[50] == doctest::Approx(1.25));
  CHECK(p.k.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(solve_short_skeleton(spec, TimeGrid(2.0, 50), ControlPath::zero(TimeGrid(2.0, 50))),
                  std::invalid_argument);
}

TEST_CASE("skeleton checks its inputs") {
  ModelSpec spec;
  const TimeGrid grid(1.0, 10);
  CHECK_THROWS_AS(solve_skeleton(spec, grid, ControlPath::zero(grid), VectorXd::Zero(5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_skeleton(spec, grid, ControlPath::zero(TimeGrid(1.0, 5)), VectorXd::Zero(11)),
                  std::invalid_argument);
}
