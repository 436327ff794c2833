#pragma once

#include <optional>

#include "mrsde/control.hpp"
#include "mrsde/model.hpp"
#include "mrsde/skeleton.hpp"

namespace mrsde {

inline constexpr double kInitTol = 1e-9;

struct RateResult {
  double value = 0.0;  // +inf when no control reproduces the path
  std::optional<ControlPath> optimal_control;
  int iterations = 0;
  double grad_norm = 0.0;
  double terminal_residual = 0.0;
};

enum class RateMode { small_noise, short_time };

/// Rate of a path by cell-wise control recovery:
///   phi_j = (g_{j+1} - g_j - b(g_j) dt - (k0_{j+1} - k0_j)) / (sigma(g_j) dt).
/// Throws DegenerateDiffusion if sigma vanishes along g.
RateResult path_rate(const ModelSpec& spec, const DeterministicPath& g, const VectorXd& k0);

/// Same functional for the short-time skeleton (b = 0, k0 = 0, unit horizon).
RateResult short_path_rate(const ModelSpec& spec, const DeterministicPath& g);

/// Discretized endpoint problem
///   minimize  E(phi) = (1/2) sum phi_j^2 dt   subject to  Y^phi_T = target,
/// posed through the augmented objective
///   J(phi) = E(phi) + mu r + (lambda/2) r^2,   r = Y^phi_T - target.
/// The gradient comes from the discrete adjoint of the Euler recursion.
class TerminalControlProblem {
 public:
  TerminalControlProblem(const ModelSpec& spec, const TimeGrid& grid, VectorXd k0, RateMode mode,
                         double target);

  const TimeGrid& grid() const { return grid_; }
  const VectorXd& k0() const { return k0_; }
  double target() const { return target_; }

  /// Y^phi_T by forward Euler.
  double terminal(const VectorXd& phi) const;
  double objective(const VectorXd& phi, double penalty, double multiplier) const;
  /// Gradient w.r.t. the raw control vector (includes the dt weights).
  VectorXd gradient(const VectorXd& phi, double penalty, double multiplier) const;

 private:
  double drift(double y) const { return with_drift_ ? spec_.b(y) : 0.0; }
  double drift_derivative(double y) const { return with_drift_ ? spec_.b.derivative(y) : 0.0; }
  void forward(const VectorXd& phi, VectorXd& y) const;

  ModelSpec spec_;
  TimeGrid grid_;
  VectorXd k0_;
  bool with_drift_;
  double target_;
};

struct EndpointOptions {
  Index n_steps = 200;
  double terminal_tol = 1e-6;
  double grad_tol = 1e-6;
  double initial_penalty = 10.0;
  int max_outer = 40;
  int max_inner = 20000;
  std::optional<double> energy_bound;  // projects onto {energy <= N}
};

/// inf{I(g) : g(T) = target} over piecewise-constant controls, by projected
/// (spectral) gradient steps on the augmented objective with multiplier
/// updates and penalty escalation. Requires spec.sigma_floor > 0.
/// Throws NonConvergence when the tolerances are not met.
RateResult endpoint_rate(const ModelSpec& spec, double target, RateMode mode,
                         const EndpointOptions& options = {});

}  // namespace mrsde
