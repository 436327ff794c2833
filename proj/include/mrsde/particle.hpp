#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "mrsde/control.hpp"
#include "mrsde/grid.hpp"
#include "mrsde/model.hpp"
#include "mrsde/types.hpp"

namespace mrsde {

/// State of the ensemble at grid node `step`, after K has been updated.
struct StepView {
  Index step;
  double t;
  const VectorXd& u;  // U column; X = u + k
  double k;
};

using StepObserver = std::function<void(const StepView&)>;

struct SimulationOptions {
  bool keep_paths = true;  // store the full U matrix
  int workers = 1;
  double tol_g0 = kDefaultG0Tol;
  StepObserver observer;  // called once per node, in step order
};

/// Particle paths of U on the grid plus the deterministic reflection K.
/// X is never stored: x(i, k) = u(i, k) + k_path[k] by construction.
struct EnsemblePath {
  TimeGrid grid;
  Index n_particles = 0;
  MatrixXd u;          // n_particles x n_nodes, empty unless keep_paths
  VectorXd u_terminal;  // always kept
  VectorXd k_path;
  VectorXd h_mean_x;  // empirical E[h(X_{t_k})] per node
  std::uint64_t seed = 0;
  double epsilon = 0.0;

  bool has_paths() const { return u.cols() == grid.n_nodes(); }
  double x(Index i, Index k) const { return u(i, k) + k_path[k]; }
  VectorXd x_column(Index k) const { return u.col(k).array() + k_path[k]; }
  VectorXd x_terminal() const { return u_terminal.array() + k_path[grid.n_steps()]; }
};

/// Small-noise system: drift b, diffusion sqrt(eps) sigma, K the running
/// sup of G0 over the empirical law of U. eps = 1 is the original system.
EnsemblePath simulate(const ModelSpec& spec, const TimeGrid& grid, Index n_particles,
                      double epsilon, std::uint64_t seed, const SimulationOptions& options = {});

/// Extra drift sigma(X) phi with K frozen to `k_frozen`; no G0 evaluations.
EnsemblePath simulate_controlled(const ModelSpec& spec, const TimeGrid& grid, Index n_particles,
                                 double epsilon, std::uint64_t seed, const ControlPath& phi,
                                 const VectorXd& k_frozen, const SimulationOptions& options = {});

/// Time-rescaled system on [0, 1]: drift eps b, diffusion sqrt(eps) sigma.
/// Its law matches {X_{eps t}} of the original system.
EnsemblePath simulate_short_time(const ModelSpec& spec, const TimeGrid& grid, Index n_particles,
                                 double epsilon, std::uint64_t seed,
                                 const SimulationOptions& options = {});

/// Discrete flat-solution diagnostics for an ensemble.
struct FlatnessReport {
  bool k_starts_at_zero = false;
  bool k_nondecreasing = false;
  double min_constraint = 0.0;     // min_k E_M[h(X_{t_k})]
  double flatness_residual = 0.0;  // sum_k max(0, E_M[h(X_{k+1})]) (K_{k+1} - K_k)
  double k_terminal = 0.0;
};

FlatnessReport check_flat_structure(const EnsemblePath& path);

}  // namespace mrsde
