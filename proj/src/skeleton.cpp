#include "mrsde/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrsde/errors.hpp"

namespace mrsde {

namespace {

void check_finite(double v, Index step) {
  if (!std::isfinite(v))
    throw NumericalAbort("non-finite deterministic state at step " + std::to_string(step), step);
}

}  // namespace

DeterministicPath solve_mr_ode(const ModelSpec& spec, const TimeGrid& grid) {
  const Index n = grid.n_steps();
  const double dt = grid.dt();
  const double root = spec.h.root();
  DeterministicPath out{grid, VectorXd(grid.n_nodes()), VectorXd(grid.n_nodes())};

  double u = spec.xi;
  double k = 0.0;
  out.x[0] = u;
  out.k[0] = 0.0;
  for (Index j = 0; j < n; ++j) {
    u += spec.b(u + k) * dt;
    k = std::max(k, std::max(0.0, root - u));
    check_finite(u, j + 1);
    out.x[j + 1] = u + k;
    out.k[j + 1] = k;
  }
  return out;
}

DeterministicPath solve_skeleton(const ModelSpec& spec, const TimeGrid& grid, const ControlPath& phi,
                                 const VectorXd& k0) {
  if (!(phi.grid() == grid)) throw std::invalid_argument("solve_skeleton: control grid mismatch");
  if (k0.size() != grid.n_nodes())
    throw std::invalid_argument("solve_skeleton: reflection path length mismatch");
  const double dt = grid.dt();
  DeterministicPath out{grid, VectorXd(grid.n_nodes()), k0};
  double y = spec.xi + k0[0];
  out.x[0] = y;
  for (Index j = 0; j < grid.n_steps(); ++j) {
    y += (spec.b(y) + spec.sigma(y) * phi[j]) * dt + (k0[j + 1] - k0[j]);
    check_finite(y, j + 1);
    out.x[j + 1] = y;
  }
  return out;
}

DeterministicPath solve_short_skeleton(const ModelSpec& spec, const TimeGrid& grid,
                                       const ControlPath& phi) {
  if (!(phi.grid() == grid)) throw std::invalid_argument("solve_short_skeleton: control grid mismatch");
  if (grid.horizon() != 1.0)
    throw std::invalid_argument("solve_short_skeleton runs on the unit horizon");
  const double dt = grid.dt();
  DeterministicPath out{grid, VectorXd(grid.n_nodes()), VectorXd::Zero(grid.n_nodes())};
  double y = spec.xi;
  out.x[0] = y;
  for (Index j = 0; j < grid.n_steps(); ++j) {
    y += spec.sigma(y) * phi[j] * dt;
    check_finite(y, j + 1);
    out.x[j + 1] = y;
  }
  return out;
}

}  // namespace mrsde
