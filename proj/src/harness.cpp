#include "mrsde/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mrsde/control.hpp"
#include "mrsde/noise.hpp"
#include "mrsde/particle.hpp"
#include "mrsde/rate.hpp"
#include "mrsde/skeleton.hpp"
#include "mrsde/stats.hpp"

namespace mrsde {

namespace {

TimeGrid plan_grid(const ModelSpec& spec, Variant variant, Index n_steps) {
  return variant == Variant::small_noise ? TimeGrid(spec.horizon, n_steps) : TimeGrid(1.0, n_steps);
}

// Deterministic limit X0 on the grid: the mean-reflected ODE, or the
// constant xi for the rescaled short-time system.
VectorXd limit_path(const ModelSpec& spec, Variant variant, const TimeGrid& grid) {
  if (variant == Variant::small_noise) return solve_mr_ode(spec, grid).x;
  return VectorXd::Constant(grid.n_nodes(), spec.xi);
}

struct BatchCount {
  Index hits = 0;
  Index samples = 0;
};

BatchCount run_batch(const ExperimentPlan& plan, const TimeGrid& grid, const VectorXd& x0,
                     double epsilon, std::uint64_t seed) {
  SimulationOptions options;
  options.keep_paths = false;
  options.workers = plan.workers;

  VectorXd sup_dev;
  if (plan.event.kind == Event::Kind::sup_deviation) {
    sup_dev = VectorXd::Zero(plan.n_particles);
    options.observer = [&](const StepView& v) {
      const double ref = x0[v.step];
      for (Index i = 0; i < v.u.size(); ++i)
        sup_dev[i] = std::max(sup_dev[i], std::abs(v.u[i] + v.k - ref));
    };
  }
  const EnsemblePath path =
      plan.variant == Variant::small_noise
          ? simulate(plan.model, grid, plan.n_particles, epsilon, seed, options)
          : simulate_short_time(plan.model, grid, plan.n_particles, epsilon, seed, options);

  BatchCount c;
  c.samples = plan.n_particles;
  if (plan.event.kind == Event::Kind::sup_deviation) {
    c.hits = (sup_dev.array() >= plan.event.threshold).count();
  } else {
    const VectorXd xt = path.x_terminal();
    c.hits = plan.event.kind == Event::Kind::endpoint_above
                 ? (xt.array() >= plan.event.threshold).count()
                 : (xt.array() <= plan.event.threshold).count();
  }
  return c;
}

// Constant control c on cells [0, hit) and zero after.
DeterministicPath ramp_path(const ModelSpec& spec, Variant variant, const TimeGrid& grid,
                            const VectorXd& k0, Index hit, double c) {
  VectorXd phi = VectorXd::Zero(grid.n_steps());
  phi.head(hit).setConstant(c);
  const ControlPath control(grid, std::move(phi));
  return variant == Variant::small_noise ? solve_skeleton(spec, grid, control, k0)
                                         : solve_short_skeleton(spec, grid, control);
}

}  // namespace

void validate_plan(const ExperimentPlan& plan) {
  if (plan.epsilons.empty()) throw std::invalid_argument("plan: empty epsilon schedule");
  for (std::size_t i = 0; i < plan.epsilons.size(); ++i) {
    const double e = plan.epsilons[i];
    if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("plan: epsilons must lie in (0, 1]");
    if (i > 0 && !(e < plan.epsilons[i - 1]))
      throw std::invalid_argument("plan: epsilons must be strictly decreasing");
  }
  if (!std::isfinite(plan.event.threshold))
    throw std::invalid_argument("plan: event threshold must be finite");
  if (plan.event.kind == Event::Kind::sup_deviation && !(plan.event.threshold > 0.0))
    throw std::invalid_argument("plan: sup-deviation threshold must be positive");
  if (plan.n_particles < 1 || plan.n_steps < 1)
    throw std::invalid_argument("plan: n_particles and n_steps must be positive");
  if (plan.n_mc_batches < 2) throw std::invalid_argument("plan: need at least 2 batches");
  if (plan.variant == Variant::short_time && plan.model.horizon != 1.0)
    throw std::invalid_argument("plan: the short-time variant runs on the unit horizon");
}

double candidate_tube_rate(const ModelSpec& spec, Variant variant, double delta, Index n_steps) {
  const TimeGrid grid = plan_grid(spec, variant, n_steps);
  const VectorXd k0 = variant == Variant::small_noise ? solve_mr_ode(spec, grid).k
                                                      : VectorXd::Zero(grid.n_nodes());
  const VectorXd x0 = limit_path(spec, variant, grid);

  double best = std::numeric_limits<double>::infinity();
  constexpr Index kHitTimes = 40;
  for (Index q = 1; q <= kHitTimes; ++q) {
    const Index hit = std::max<Index>(1, grid.n_steps() * q / kHitTimes);
    for (const double side : {1.0, -1.0}) {
      auto deviation = [&](double c) {
        return side * (ramp_path(spec, variant, grid, k0, hit, c).x[hit] - x0[hit]);
      };
      // Deviation is monotone in c with the sign of sigma.
      const double dir = side * (spec.sigma(spec.xi) >= 0.0 ? 1.0 : -1.0);
      double lo = 0.0, hi = dir;
      int grow = 0;
      while (deviation(hi) < delta && ++grow < 60) {
        lo = hi;
        hi *= 2.0;
      }
      if (deviation(hi) < delta) continue;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (deviation(mid) >= delta ? hi : lo) = mid;
      }
      const DeterministicPath g = ramp_path(spec, variant, grid, k0, hit, hi);
      const RateResult r = variant == Variant::small_noise ? path_rate(spec, g, k0)
                                                           : short_path_rate(spec, g);
      best = std::min(best, r.value);
    }
  }
  return best;
}

LdpReport run_ldp_experiment(const ExperimentPlan& plan) {
  validate_plan(plan);
  const TimeGrid grid = plan_grid(plan.model, plan.variant, plan.n_steps);
  const VectorXd x0 = limit_path(plan.model, plan.variant, grid);
  const Index n_samples = plan.n_particles * plan.n_mc_batches;

  LdpReport report;
  report.statistic = "per-particle";

  // Pilot: batch 0 at the largest epsilon, reused as part of the estimate.
  const BatchCount pilot = run_batch(plan, grid, x0, plan.epsilons.front(), derive_seed(plan.seed, 0));
  if (static_cast<double>(pilot.hits) / static_cast<double>(pilot.samples) <
      10.0 / static_cast<double>(n_samples))
    throw std::invalid_argument("plan: pilot run sees too few hits at the largest epsilon");

  for (std::size_t e = 0; e < plan.epsilons.size(); ++e) {
    const double eps = plan.epsilons[e];
    std::vector<double> fractions;
    LdpRow row;
    row.epsilon = eps;
    for (Index b = 0; b < plan.n_mc_batches; ++b) {
      // Common random numbers: batch b uses the same noise at every epsilon.
      const BatchCount c = (e == 0 && b == 0)
                               ? pilot
                               : run_batch(plan, grid, x0, eps, derive_seed(plan.seed, static_cast<std::uint64_t>(b)));
      row.hits += c.hits;
      row.samples += c.samples;
      fractions.push_back(static_cast<double>(c.hits) / static_cast<double>(c.samples));
    }
    const stats::Estimate est = stats::mean_and_error(fractions);
    row.p_hat = static_cast<double>(row.hits) / static_cast<double>(row.samples);
    row.std_err = est.std_err;
    row.zero_hits = row.hits == 0;
    if (row.zero_hits) {
      row.neg_eps_log_p = std::numeric_limits<double>::infinity();
      row.neg_eps_log_p_se = std::numeric_limits<double>::infinity();
    } else {
      row.neg_eps_log_p = -eps * std::log(row.p_hat);
      row.neg_eps_log_p_se = eps * row.std_err / row.p_hat;
    }
    report.rows.push_back(row);
  }

  // Reference rate.
  const double x0_end = x0[grid.n_steps()];
  const RateMode mode = plan.variant == Variant::small_noise ? RateMode::small_noise : RateMode::short_time;
  const double a = plan.event.threshold;
  if (plan.event.kind == Event::Kind::sup_deviation) {
    if (plan.model.sigma_floor > 0.0) {
      report.reference_rate = candidate_tube_rate(plan.model, plan.variant, a, plan.n_steps);
      report.reference_label = "upper bound from candidate skeleton paths";
    } else {
      report.reference_rate = std::numeric_limits<double>::quiet_NaN();
      report.reference_label = "unavailable: degenerate diffusion";
    }
    report.reference_is_upper_bound = true;
  } else {
    const bool typical = plan.event.kind == Event::Kind::endpoint_above ? a <= x0_end : a >= x0_end;
    if (typical) {
      report.reference_rate = 0.0;
      report.reference_label = "typical event: X0_T lies in the event";
    } else if (plan.model.sigma_floor > 0.0) {
      EndpointOptions options;
      options.n_steps = plan.n_steps;
      report.reference_rate = endpoint_rate(plan.model, a, mode, options).value;
      report.reference_label = "endpoint contraction";
    } else {
      report.reference_rate = std::numeric_limits<double>::quiet_NaN();
      report.reference_label = "unavailable: degenerate diffusion";
    }
  }

  report.nonincreasing_in_epsilon = true;
  report.strictly_increasing_in_epsilon = true;
  for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
    const LdpRow& big = report.rows[i];  // larger epsilon
    const LdpRow& small = report.rows[i + 1];
    if (big.zero_hits || small.zero_hits) {
      report.nonincreasing_in_epsilon = report.strictly_increasing_in_epsilon = false;
      continue;
    }
    const double pooled = std::hypot(big.neg_eps_log_p_se, small.neg_eps_log_p_se);
    if (small.neg_eps_log_p < big.neg_eps_log_p - 2.0 * pooled) report.nonincreasing_in_epsilon = false;
    if (!(small.neg_eps_log_p < big.neg_eps_log_p)) report.strictly_increasing_in_epsilon = false;
  }
  return report;
}

// ---------------------------------------------------------------------------

bool is_closed_form_instance(const ModelSpec& spec) {
  return spec.b.kind() == CoefficientKind::constant && spec.b.params()[0] == -1.0 &&
         spec.sigma.kind() == CoefficientKind::constant && spec.sigma.params()[0] == 1.0 &&
         spec.xi == 0.0 && spec.h.kind() == ConstraintKind::identity;
}

ConvergenceTable run_convergence_study(const ModelSpec& spec, const std::vector<double>& dts,
                                       const std::vector<Index>& n_particles, std::uint64_t seed,
                                       Index replicates, int workers) {
  if (!is_closed_form_instance(spec))
    throw std::invalid_argument("convergence study needs b = -1, sigma = 1, xi = 0, h = identity");
  if (dts.empty() || n_particles.empty() || replicates < 1)
    throw std::invalid_argument("convergence study needs dt and n_particles lists");

  ConvergenceTable table;
  SimulationOptions options;
  options.keep_paths = false;
  options.workers = workers;
  for (std::size_t a = 0; a < dts.size(); ++a) {
    const Index steps = std::max<Index>(1, std::llround(spec.horizon / dts[a]));
    const TimeGrid grid(spec.horizon, steps);
    for (std::size_t c = 0; c < n_particles.size(); ++c) {
      std::vector<double> k_err, x_err;
      for (Index r = 0; r < replicates; ++r) {
        // Same noise for every dt at a given (n, replicate).
        const std::uint64_t s = derive_seed(seed, c, static_cast<std::uint64_t>(r));
        const EnsemblePath p = simulate(spec, grid, n_particles[c], 1.0, s, options);
        k_err.push_back(std::abs(p.k_path[grid.n_steps()] - spec.horizon));
        x_err.push_back(std::abs(p.x_terminal().mean()));
      }
      const stats::Estimate ke = stats::mean_and_error(k_err);
      const stats::Estimate xe = stats::mean_and_error(x_err);
      table.rows.push_back({grid.dt(), n_particles[c], ke.mean, xe.mean, ke.std_err});
    }
  }

  const double finest = *std::min_element(dts.begin(), dts.end());
  const Index largest = *std::max_element(n_particles.begin(), n_particles.end());
  std::vector<double> nx, ny, dx, dy;
  for (const auto& row : table.rows) {
    if (std::abs(row.dt - finest) <= 1e-12 * finest) {
      nx.push_back(static_cast<double>(row.n_particles));
      ny.push_back(row.k_error);
    }
    if (row.n_particles == largest) {
      dx.push_back(row.dt);
      dy.push_back(row.k_error);
    }
  }
  table.slope_in_n = nx.size() >= 2 ? stats::loglog_slope(nx, ny) : std::numeric_limits<double>::quiet_NaN();
  table.slope_in_dt = dx.size() >= 2 ? stats::loglog_slope(dx, dy) : std::numeric_limits<double>::quiet_NaN();
  return table;
}

std::vector<EpsLimitRow> run_eps_limit_study(const ModelSpec& spec,
                                             const std::vector<double>& epsilons,
                                             Index n_particles, Index n_steps, std::uint64_t seed,
                                             Index n_batches, int workers) {
  if (n_particles < n_batches) throw std::invalid_argument("eps-limit study: fewer particles than batches");
  const TimeGrid grid(spec.horizon, n_steps);
  const DeterministicPath limit = solve_mr_ode(spec, grid);
  const VectorXd u0 = limit.x - limit.k;
  const double lemma_constant = spec.h.M() / spec.h.m();

  std::vector<EpsLimitRow> rows;
  for (double eps : epsilons) {
    VectorXd sup_sq = VectorXd::Zero(n_particles);
    double w1_sup = 0.0;
    SimulationOptions options;
    options.keep_paths = false;
    options.workers = workers;
    options.observer = [&](const StepView& v) {
      const double x0 = limit.x[v.step];
      const double ref_u = u0[v.step];
      double w1_dirac = 0.0;
      for (Index i = 0; i < v.u.size(); ++i) {
        const double dev = v.u[i] + v.k - x0;
        sup_sq[i] = std::max(sup_sq[i], dev * dev);
        w1_dirac += std::abs(v.u[i] - ref_u);
      }
      w1_sup = std::max(w1_sup, w1_dirac / static_cast<double>(v.u.size()));
    };
    const EnsemblePath path = simulate(spec, grid, n_particles, eps, seed, options);
    const stats::Estimate est = stats::batch_means({sup_sq.data(), static_cast<std::size_t>(sup_sq.size())}, n_batches);
    EpsLimitRow row;
    row.epsilon = eps;
    row.mean_sq_sup_x_dev = est.mean;
    row.std_err = est.std_err;
    row.sup_k_dev = (path.k_path - limit.k).cwiseAbs().maxCoeff();
    row.w1_bound = lemma_constant * w1_sup;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mrsde
