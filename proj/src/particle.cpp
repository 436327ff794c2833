#include "mrsde/particle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "mrsde/errors.hpp"
#include "mrsde/measure.hpp"
#include "mrsde/noise.hpp"
#include "mrsde/parallel.hpp"

namespace mrsde {

namespace {

struct Scheme {
  double drift_scale = 1.0;
  double diffusion_scale = 1.0;
  const ControlPath* control = nullptr;  // extra drift sigma(X) phi_k
  const VectorXd* k_frozen = nullptr;    // K supplied instead of computed
};

void check_common(const ModelSpec& spec, Index n_particles, double epsilon) {
  if (n_particles < 1) throw std::invalid_argument("simulate needs n_particles >= 1");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("simulate needs epsilon >= 0");
  if (!(spec.h(spec.xi) >= 0.0))
    throw std::invalid_argument("simulate needs h(xi) >= 0");
}

EnsemblePath run_scheme(const ModelSpec& spec, const TimeGrid& grid, Index n_particles,
                        double epsilon, std::uint64_t seed, const Scheme& scheme,
                        const SimulationOptions& options) {
  const Index n_steps = grid.n_steps();
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double noise_scale = scheme.diffusion_scale * sqrt_dt;
  const NoiseStream noise(seed);

  EnsemblePath path{grid, n_particles, MatrixXd(), VectorXd(), VectorXd::Zero(grid.n_nodes()),
                    VectorXd::Zero(grid.n_nodes()), seed, epsilon};
  if (options.keep_paths) path.u.resize(n_particles, grid.n_nodes());

  VectorXd u = VectorXd::Constant(n_particles, spec.xi);
  VectorXd u_next(n_particles);
  VectorXd spare(n_particles);  // sine half of the pair drawn at the even step

  double k = scheme.k_frozen ? (*scheme.k_frozen)[0] : 0.0;
  path.k_path[0] = k;
  path.h_mean_x[0] = spec.h(spec.xi + k);
  if (options.keep_paths) path.u.col(0) = u;
  if (options.observer) options.observer(StepView{0, grid.node(0), u, k});

  for (Index step = 0; step < n_steps; ++step) {
    const double phi = scheme.control ? (*scheme.control)[step] : 0.0;
    std::atomic<bool> finite{true};
    parallel_for(options.workers, n_particles, [&](Index begin, Index end) {
      bool ok = true;
      for (Index i = begin; i < end; ++i) {
        const double x = u[i] + k;
        const double sx = spec.sigma(x);
        double drift = scheme.drift_scale * spec.b(x);
        if (scheme.control) drift += sx * phi;
        double next = u[i] + drift * dt;
        if (noise_scale != 0.0) {
          double z;
          if (step % 2 == 0) {
            const auto pair = noise.normal_pair(static_cast<std::uint64_t>(i),
                                                static_cast<std::uint64_t>(step / 2));
            z = pair[0];
            spare[i] = pair[1];
          } else {
            z = spare[i];
          }
          next += noise_scale * sx * z;
        }
        u_next[i] = next;
        ok = ok && std::isfinite(next);
      }
      if (!ok) finite.store(false, std::memory_order_relaxed);
    });
    if (!finite.load())
      throw NumericalAbort("non-finite particle state at step " + std::to_string(step + 1),
                           step + 1);

    u.swap(u_next);
    const std::span<const double> law(u.data(), static_cast<std::size_t>(u.size()));
    if (scheme.k_frozen) {
      k = (*scheme.k_frozen)[step + 1];
    } else {
      k = g0_above(spec.h, law, k, options.tol_g0);
    }
    path.k_path[step + 1] = k;
    path.h_mean_x[step + 1] = h_mean(spec.h, k, law);
    if (options.keep_paths) path.u.col(step + 1) = u;
    if (options.observer) options.observer(StepView{step + 1, grid.node(step + 1), u, k});
  }
  path.u_terminal = u;
  return path;
}

}  // namespace

EnsemblePath simulate(const ModelSpec& spec, const TimeGrid& grid, Index n_particles,
                      double epsilon, std::uint64_t seed, const SimulationOptions& options) {
  check_common(spec, n_particles, epsilon);
  Scheme scheme;
  scheme.diffusion_scale = std::sqrt(epsilon);
  return run_scheme(spec, grid, n_particles, epsilon, seed, scheme, options);
}

EnsemblePath simulate_controlled(const ModelSpec& spec, const TimeGrid& grid, Index n_particles,
                                 double epsilon, std::uint64_t seed, const ControlPath& phi,
                                 const VectorXd& k_frozen, const SimulationOptions& options) {
  check_common(spec, n_particles, epsilon);
  if (k_frozen.size() != grid.n_nodes())
    throw std::invalid_argument("simulate_controlled: k_frozen length does not match the grid");
  if (!(phi.grid() == grid))
    throw std::invalid_argument("simulate_controlled: control grid does not match");
  if (k_frozen[0] != 0.0)
    throw std::invalid_argument("simulate_controlled: k_frozen must start at 0");
  for (Index j = 0; j + 1 < k_frozen.size(); ++j)
    if (k_frozen[j + 1] < k_frozen[j])
      throw std::invalid_argument("simulate_controlled: k_frozen must be nondecreasing");
  Scheme scheme;
  scheme.diffusion_scale = std::sqrt(epsilon);
  scheme.control = &phi;
  scheme.k_frozen = &k_frozen;
  return run_scheme(spec, grid, n_particles, epsilon, seed, scheme, options);
}

EnsemblePath simulate_short_time(const ModelSpec& spec, const TimeGrid& grid, Index n_particles,
                                 double epsilon, std::uint64_t seed,
                                 const SimulationOptions& options) {
  check_common(spec, n_particles, epsilon);
  if (grid.horizon() != 1.0)
    throw std::invalid_argument("simulate_short_time runs on the unit horizon");
  Scheme scheme;
  scheme.drift_scale = epsilon;
  scheme.diffusion_scale = std::sqrt(epsilon);
  return run_scheme(spec, grid, n_particles, epsilon, seed, scheme, options);
}

FlatnessReport check_flat_structure(const EnsemblePath& path) {
  FlatnessReport r;
  const VectorXd& k = path.k_path;
  r.k_starts_at_zero = k[0] == 0.0;
  r.k_nondecreasing = true;
  for (Index j = 0; j + 1 < k.size(); ++j)
    if (k[j + 1] < k[j]) r.k_nondecreasing = false;
  r.min_constraint = path.h_mean_x.minCoeff();
  double residual = 0.0;
  for (Index j = 0; j + 1 < k.size(); ++j)
    residual += std::max(0.0, path.h_mean_x[j + 1]) * (k[j + 1] - k[j]);
  r.flatness_residual = residual;
  r.k_terminal = k[k.size() - 1];
  return r;
}

}  // namespace mrsde
