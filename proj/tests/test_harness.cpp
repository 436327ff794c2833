#include <cmath>

#include "doctest.h"
#include "mrsde/harness.hpp"
#include "oracles.hpp"

using namespace mrsde;

namespace {

ModelSpec gaussian() {
  ModelSpec s;
  s.b = CoefficientFn::constant(0.0);
  s.sigma = CoefficientFn::constant(1.0);
  s.h = ConstraintFn::shifted_identity(10.0);
  s.sigma_floor = 1.0;
  return s;
}

ModelSpec closed_form() {
  ModelSpec s;
  s.b = CoefficientFn::constant(-1.0);
  s.sigma = CoefficientFn::constant(1.0);
  s.sigma_floor = 1.0;
  return s;
}

ExperimentPlan gaussian_plan() {
  ExperimentPlan p;
  p.model = gaussian();
  p.epsilons = {0.1, 0.05};
  p.event = {Event::Kind::endpoint_above, 0.5};
  p.n_particles = 2000;
  p.n_steps = 10;
  p.n_mc_batches = 10;
  p.seed = 3;
  return p;
}

}  // namespace

TEST_CASE("plans are validated") {
  ExperimentPlan p = gaussian_plan();
  CHECK_NOTHROW(validate_plan(p));
  p.epsilons = {0.05, 0.1};
  CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);
  p = gaussian_plan();
  p.epsilons = {1.5};
  CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);
  p = gaussian_plan();
  p.n_mc_batches = 1;
  CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);
  p = gaussian_plan();
  p.event = {Event::Kind::sup_deviation, -1.0};
  CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);
  p = gaussian_plan();
  p.variant = Variant::short_time;
  p.model.horizon = 2.0;
  CHECK_THROWS_AS(validate_plan(p), std::invalid_argument);
}

TEST_CASE("Gaussian endpoint tails are reproduced") {
  const LdpReport r = run_ldp_experiment(gaussian_plan());
  REQUIRE(r.rows.size() == 2);
  for (const LdpRow& row : r.rows) {
    const double exact = oracle::gaussian_tail(0.5, row.epsilon);
    CHECK(std::abs(row.p_hat - exact) <= 4.0 * row.std_err);
    CHECK(row.samples == 20000);
  }
  CHECK(r.reference_rate == doctest::Approx(0.125).epsilon(1e-3));
  CHECK(r.statistic == "per-particle");
  CHECK_FALSE(r.reference_is_upper_bound);
}

TEST_CASE("typical events have zero reference rate") {
  ExperimentPlan p = gaussian_plan();
  p.event = {Event::Kind::endpoint_below, 0.5};
  const LdpReport r = run_ldp_experiment(p);
  CHECK(r.reference_rate == 0.0);
  CHECK(r.rows[0].p_hat > 0.9);
}

TEST_CASE("rare pilots are rejected") {
  ExperimentPlan p = gaussian_plan();
  p.event = {Event::Kind::endpoint_above, 5.0};
  CHECK_THROWS_AS(run_ldp_experiment(p), std::invalid_argument);
}

TEST_CASE("same seed, same report; workers do not matter") {
  ExperimentPlan p = gaussian_plan();
  const LdpReport a = run_ldp_experiment(p);
  p.workers = 3;
  const LdpReport b = run_ldp_experiment(p);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].hits == b.rows[i].hits);
    CHECK(a.rows[i].std_err == b.rows[i].std_err);
  }
}

TEST_CASE("tube candidate rate for Brownian motion") {
  // Reaching delta by time T in a straight line costs delta^2 / (2 T).
  const double r = candidate_tube_rate(gaussian(), Variant::small_noise, 0.5, 200);
  CHECK(r == doctest::Approx(0.125).epsilon(1e-6));
}

TEST_CASE("sup-deviation events report an upper-bound reference") {
  ExperimentPlan p = gaussian_plan();
  p.event = {Event::Kind::sup_deviation, 0.5};
  const LdpReport r = run_ldp_experiment(p);
  CHECK(r.reference_is_upper_bound);
  CHECK(r.reference_rate == doctest::Approx(0.125).epsilon(1e-6));
  // Reflection principle: P(sup |B| >= a) is at least P(|B_T| >= a).
  CHECK(r.rows[0].p_hat >= 2.0 * oracle::gaussian_tail(0.5, 0.1) - 4.0 * r.rows[0].std_err);
}

TEST_CASE("convergence study needs the closed-form instance") {
  CHECK(is_closed_form_instance(closed_form()));
  CHECK_FALSE(is_closed_form_instance(gaussian()));
  CHECK_THROWS_AS(run_convergence_study(gaussian(), {0.1}, {100}, 1), std::invalid_argument);
}

TEST_CASE("convergence table rows and slopes") {
  const ConvergenceTable t = run_convergence_study(closed_form(), {0.1, 0.05}, {200, 800, 3200}, 4, 8);
  CHECK(t.rows.size() == 6);
  for (const ConvergenceRow& row : t.rows) {
    CHECK(row.k_error >= 0.0);
    CHECK(row.x_error <= 1e-9);
  }
  CHECK(t.slope_in_n < -0.2);
}

TEST_CASE("epsilon-limit study shrinks with epsilon") {
  const auto rows = run_eps_limit_study(closed_form(), {0.2, 0.05}, 2000, 100, 5, 20);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].mean_sq_sup_x_dev < rows[0].mean_sq_sup_x_dev);
  CHECK(rows[0].mean_sq_sup_x_dev / rows[1].mean_sq_sup_x_dev == doctest::Approx(4.0).epsilon(0.05));
  for (const auto& r : rows) CHECK(r.sup_k_dev >= 0.0);
}
