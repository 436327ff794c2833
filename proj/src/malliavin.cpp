#include "mrsde/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mrsde/noise.hpp"
#include "mrsde/particle.hpp"
#include "mrsde/skeleton.hpp"

namespace mrsde {

TangentBundle tangent_simulate(const ModelSpec& spec, const TimeGrid& grid, const VectorXd& k_path,
                               std::uint64_t seed, double epsilon, std::uint64_t path) {
  if (k_path.size() != grid.n_nodes())
    throw std::invalid_argument("tangent_simulate: k_path length does not match the grid");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("tangent_simulate: epsilon must be >= 0");

  const Index n = grid.n_steps();
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double scale = std::sqrt(epsilon);
  const NoiseStream noise(seed);

  TangentBundle b{grid,
                  epsilon,
                  k_path,
                  VectorXd(n),
                  VectorXd(grid.n_nodes()),
                  VectorXd(grid.n_nodes()),
                  VectorXd(grid.n_nodes()),
                  VectorXd(grid.n_nodes())};
  double u = spec.xi;
  b.x[0] = u + k_path[0];
  b.y[0] = 1.0;
  b.z[0] = 1.0;
  for (Index j = 0; j < n; ++j) {
    const double x = b.x[j];
    const double dB = sqrt_dt * noise.normal(path, static_cast<std::uint64_t>(j));
    const double s = scale * spec.sigma(x);
    const double ds = scale * spec.sigma.derivative(x);
    const double db = spec.b.derivative(x);
    b.increments[j] = dB;
    b.sigma_x[j] = s;
    u += spec.b(x) * dt + s * dB;
    b.x[j + 1] = u + k_path[j + 1];
    b.y[j + 1] = b.y[j] * (1.0 + db * dt + ds * dB);
    b.z[j + 1] = b.z[j] * (1.0 - ds * dB - (db - ds * ds) * dt);
  }
  b.sigma_x[n] = scale * spec.sigma(b.x[n]);
  return b;
}

VectorXd frozen_reflection(const ModelSpec& spec, const TimeGrid& grid, Index n_particles,
                           std::uint64_t seed, int workers) {
  if (spec.sigma.is_zero()) return solve_mr_ode(spec, grid).k;
  SimulationOptions options;
  options.keep_paths = false;
  options.workers = workers;
  return simulate(spec, grid, n_particles, 1.0, seed, options).k_path;
}

MalliavinKernel kernel_product(const TangentBundle& bundle) {
  const Index nodes = bundle.grid.n_nodes();
  MalliavinKernel kernel{bundle.grid, MatrixXd::Zero(nodes, nodes)};
  for (Index j = 0; j < nodes; ++j) {
    const double left = bundle.z[j] * bundle.sigma_x[j];
    kernel.d(j, j) = bundle.sigma_x[j];
    for (Index k = j + 1; k < nodes; ++k) kernel.d(j, k) = bundle.y[k] * left;
  }
  return kernel;
}

VectorXd kernel_direct(const ModelSpec& spec, const TangentBundle& bundle, Index r_index) {
  const Index nodes = bundle.grid.n_nodes();
  if (r_index < 0 || r_index >= nodes) throw std::out_of_range("kernel_direct: r_index outside grid");
  const double dt = bundle.grid.dt();
  const double scale = std::sqrt(bundle.epsilon);
  VectorXd d = VectorXd::Zero(nodes);
  d[r_index] = bundle.sigma_x[r_index];
  for (Index k = r_index; k + 1 < nodes; ++k) {
    const double x = bundle.x[k];
    d[k + 1] = d[k] + scale * spec.sigma.derivative(x) * d[k] * bundle.increments[k] +
               spec.b.derivative(x) * d[k] * dt;
  }
  return d;
}

double malliavin_covariance(const MalliavinKernel& kernel, Index t_index) {
  if (t_index < 0 || t_index >= kernel.d.cols())
    throw std::out_of_range("malliavin_covariance: t_index outside grid");
  return kernel.d.col(t_index).head(t_index).squaredNorm() * kernel.grid.dt();
}

CameronMartinReport cameron_martin_check(const ModelSpec& spec, const TangentBundle& bundle,
                                         const ControlPath& direction, double bump) {
  if (!(bump > 0.0)) throw std::invalid_argument("cameron_martin_check: bump must be positive");
  if (!(direction.grid() == bundle.grid))
    throw std::invalid_argument("cameron_martin_check: direction grid mismatch");
  const Index n = bundle.grid.n_steps();
  const double dt = bundle.grid.dt();
  const double scale = std::sqrt(bundle.epsilon);

  double u = spec.xi;
  double x = u + bundle.k_path[0];
  for (Index j = 0; j < n; ++j) {
    const double dB = bundle.increments[j] + bump * direction[j] * dt;
    u += spec.b(x) * dt + scale * spec.sigma(x) * dB;
    x = u + bundle.k_path[j + 1];
  }

  CameronMartinReport r;
  r.fd_derivative = (x - bundle.x[n]) / bump;
  const MalliavinKernel kernel = kernel_product(bundle);
  double pairing = 0.0;
  for (Index j = 0; j < n; ++j) pairing += kernel.d(j, n) * direction[j] * dt;
  r.kernel_pairing = pairing;
  r.abs_error = std::abs(r.fd_derivative - r.kernel_pairing);
  return r;
}

DensityGrid density_estimate(const VectorXd& samples, double bandwidth) {
  if (samples.size() < 2) throw std::invalid_argument("density_estimate needs at least 2 samples");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("density_estimate needs bandwidth > 0");

  std::vector<double> sorted(samples.data(), samples.data() + samples.size());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front() - 3.0 * bandwidth;
  const double hi = sorted.back() + 3.0 * bandwidth;

  DensityGrid out{VectorXd::LinSpaced(kDensityPoints, lo, hi), VectorXd::Zero(kDensityPoints)};
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  // Kernel contributions beyond 10 bandwidths are below exp(-50).
  const double cutoff = 10.0 * bandwidth;
  for (Index i = 0; i < kDensityPoints; ++i) {
    const double at = out.x[i];
    auto first = std::lower_bound(sorted.begin(), sorted.end(), at - cutoff);
    auto last = std::upper_bound(first, sorted.end(), at + cutoff);
    double s = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (at - *it) / bandwidth;
      s += std::exp(-0.5 * z * z);
    }
    out.f[i] = s * norm;
  }
  return out;
}

double trapezoid(const DensityGrid& density) {
  double s = 0.0;
  for (Index i = 0; i + 1 < density.x.size(); ++i)
    s += 0.5 * (density.f[i] + density.f[i + 1]) * (density.x[i + 1] - density.x[i]);
  return s;
}

VectorXd picard_sup_errors(const ModelSpec& spec, const TangentBundle& bundle, int n_iter) {
  const Index nodes = bundle.grid.n_nodes();
  const double dt = bundle.grid.dt();
  const double scale = std::sqrt(bundle.epsilon);
  VectorXd iterate = bundle.k_path.array() + spec.xi;
  VectorXd errors(n_iter + 1);
  errors[0] = (iterate - bundle.x).cwiseAbs().maxCoeff();
  VectorXd next(nodes);
  for (int it = 1; it <= n_iter; ++it) {
    double u = spec.xi;
    next[0] = u + bundle.k_path[0];
    for (Index j = 0; j + 1 < nodes; ++j) {
      u += spec.b(iterate[j]) * dt + scale * spec.sigma(iterate[j]) * bundle.increments[j];
      next[j + 1] = u + bundle.k_path[j + 1];
    }
    iterate.swap(next);
    errors[it] = (iterate - bundle.x).cwiseAbs().maxCoeff();
  }
  return errors;
}

}  // namespace mrsde
