#include "mrsde/rate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "mrsde/errors.hpp"

namespace mrsde {

namespace {

RateResult recover(const ModelSpec& spec, const DeterministicPath& g, const VectorXd& k0,
                   bool with_drift) {
  const TimeGrid& grid = g.grid;
  if (g.x.size() != grid.n_nodes() || k0.size() != grid.n_nodes())
    throw std::invalid_argument("path_rate: path and reflection must live on the same grid");

  RateResult out;
  if (!(std::abs(g.x[0] - spec.xi) <= kInitTol)) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  const double dt = grid.dt();
  VectorXd phi(grid.n_steps());
  for (Index j = 0; j < grid.n_steps(); ++j) {
    const double s = spec.sigma(g.x[j]);
    if (!(std::abs(s) > 0.0))
      throw DegenerateDiffusion("path_rate: sigma vanishes along the path");
    const double drift = with_drift ? spec.b(g.x[j]) * dt : 0.0;
    phi[j] = (g.x[j + 1] - g.x[j] - drift - (k0[j + 1] - k0[j])) / (s * dt);
  }
  ControlPath control(grid, std::move(phi));
  out.value = control.energy();
  out.optimal_control = std::move(control);
  return out;
}

}  // namespace

RateResult path_rate(const ModelSpec& spec, const DeterministicPath& g, const VectorXd& k0) {
  return recover(spec, g, k0, true);
}

RateResult short_path_rate(const ModelSpec& spec, const DeterministicPath& g) {
  if (g.grid.horizon() != 1.0)
    throw std::invalid_argument("short_path_rate runs on the unit horizon");
  return recover(spec, g, VectorXd::Zero(g.grid.n_nodes()), false);
}

// ---------------------------------------------------------------------------

TerminalControlProblem::TerminalControlProblem(const ModelSpec& spec, const TimeGrid& grid,
                                               VectorXd k0, RateMode mode, double target)
    : spec_(spec),
      grid_(grid),
      k0_(std::move(k0)),
      with_drift_(mode == RateMode::small_noise),
      target_(target) {
  if (k0_.size() != grid_.n_nodes())
    throw std::invalid_argument("TerminalControlProblem: reflection path length mismatch");
}

void TerminalControlProblem::forward(const VectorXd& phi, VectorXd& y) const {
  const double dt = grid_.dt();
  y.resize(grid_.n_nodes());
  y[0] = spec_.xi + k0_[0];
  for (Index j = 0; j < grid_.n_steps(); ++j)
    y[j + 1] = y[j] + (drift(y[j]) + spec_.sigma(y[j]) * phi[j]) * dt + (k0_[j + 1] - k0_[j]);
}

double TerminalControlProblem::terminal(const VectorXd& phi) const {
  VectorXd y;
  forward(phi, y);
  return y[grid_.n_steps()];
}

double TerminalControlProblem::objective(const VectorXd& phi, double penalty,
                                         double multiplier) const {
  const double r = terminal(phi) - target_;
  return 0.5 * phi.squaredNorm() * grid_.dt() + multiplier * r + 0.5 * penalty * r * r;
}

VectorXd TerminalControlProblem::gradient(const VectorXd& phi, double penalty,
                                          double multiplier) const {
  const double dt = grid_.dt();
  VectorXd y;
  forward(phi, y);
  const Index n = grid_.n_steps();
  double adjoint = multiplier + penalty * (y[n] - target_);
  VectorXd g(n);
  for (Index j = n - 1; j >= 0; --j) {
    const double s = spec_.sigma(y[j]);
    g[j] = phi[j] * dt + adjoint * s * dt;
    adjoint *= 1.0 + (drift_derivative(y[j]) + spec_.sigma.derivative(y[j]) * phi[j]) * dt;
  }
  return g;
}

// ---------------------------------------------------------------------------

namespace {

struct InnerResult {
  int iterations = 0;
  double grad_norm = 0.0;
};

void project(VectorXd& phi, double dt, const std::optional<double>& bound) {
  if (!bound) return;
  const double energy = 0.5 * phi.squaredNorm() * dt;
  if (energy > *bound && energy > 0.0) phi *= std::sqrt(*bound / energy);
}

// Spectral projected gradient (Barzilai-Borwein steps, nonmonotone Armijo)
// in the L2 metric of the control space.
InnerResult spg_minimize(const TerminalControlProblem& problem, VectorXd& phi, double penalty,
                         double multiplier, double tol, int max_iter,
                         const std::optional<double>& bound) {
  const double dt = problem.grid().dt();
  constexpr int kMemory = 10;
  constexpr double kArmijo = 1e-4;

  project(phi, dt, bound);
  double f = problem.objective(phi, penalty, multiplier);
  VectorXd grad = problem.gradient(phi, penalty, multiplier) / dt;  // L2 gradient
  std::deque<double> recent{f};
  double step = 1.0 / (1.0 + penalty * problem.grid().horizon());

  auto stationarity = [&](const VectorXd& x, const VectorXd& gl2) {
    VectorXd trial = x - gl2;
    project(trial, dt, bound);
    return std::sqrt((trial - x).squaredNorm() * dt);
  };

  InnerResult out;
  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    out.grad_norm = stationarity(phi, grad);
    if (out.grad_norm <= tol) return out;

    VectorXd trial = phi - step * grad;
    project(trial, dt, bound);
    const VectorXd d = trial - phi;
    const double slope = grad.dot(d) * dt;
    const double f_ref = *std::max_element(recent.begin(), recent.end());

    double t = 1.0;
    VectorXd next;
    double f_next = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      next = phi + t * d;
      f_next = problem.objective(next, penalty, multiplier);
      if (f_next <= f_ref + kArmijo * t * slope) break;
      t *= 0.5;
    }
    VectorXd grad_next = problem.gradient(next, penalty, multiplier) / dt;
    const VectorXd s = next - phi;
    const VectorXd yv = grad_next - grad;
    const double sy = s.dot(yv);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : 1e3;

    phi = std::move(next);
    grad = std::move(grad_next);
    f = f_next;
    recent.push_back(f);
    if (recent.size() > kMemory) recent.pop_front();
  }
  out.grad_norm = stationarity(phi, grad);
  return out;
}

}  // namespace

RateResult endpoint_rate(const ModelSpec& spec, double target, RateMode mode,
                         const EndpointOptions& options) {
  if (!(spec.sigma_floor > 0.0))
    throw DegenerateDiffusion("endpoint_rate needs a nondegenerate diffusion (sigma_floor > 0)");
  if (!std::isfinite(target)) throw std::invalid_argument("endpoint_rate: target must be finite");

  const TimeGrid grid = mode == RateMode::small_noise ? TimeGrid(spec.horizon, options.n_steps)
                                                      : TimeGrid(1.0, options.n_steps);
  VectorXd k0 = mode == RateMode::small_noise ? solve_mr_ode(spec, grid).k
                                              : VectorXd::Zero(grid.n_nodes());
  const TerminalControlProblem problem(spec, grid, std::move(k0), mode, target);

  VectorXd phi = VectorXd::Zero(grid.n_steps());
  double penalty = options.initial_penalty;
  double multiplier = 0.0;
  double residual = problem.terminal(phi) - target;
  int iterations = 0;
  double grad_norm = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < options.max_outer; ++outer) {
    const InnerResult inner = spg_minimize(problem, phi, penalty, multiplier, 0.1 * options.grad_tol,
                                           options.max_inner, options.energy_bound);
    iterations += inner.iterations;
    const double previous = residual;
    residual = problem.terminal(phi) - target;
    grad_norm = inner.grad_norm;
    if (std::abs(residual) <= options.terminal_tol && grad_norm <= options.grad_tol) {
      RateResult out;
      ControlPath control(grid, phi);
      out.value = control.energy();
      out.optimal_control = std::move(control);
      out.iterations = iterations;
      out.grad_norm = grad_norm;
      out.terminal_residual = residual;
      return out;
    }
    multiplier += penalty * residual;
    if (std::abs(residual) > 0.25 * std::abs(previous)) penalty *= 10.0;
  }

  std::ostringstream os;
  os << "endpoint_rate did not converge: target=" << target << " iterations=" << iterations
     << " residual=" << residual << " grad_norm=" << grad_norm << " penalty=" << penalty;
  throw NonConvergence(os.str());
}

}  // namespace mrsde
