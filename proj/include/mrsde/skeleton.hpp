#pragma once

#include "mrsde/control.hpp"
#include "mrsde/grid.hpp"
#include "mrsde/model.hpp"

namespace mrsde {

/// Deterministic path with its reflection part (zero when none applies).
struct DeterministicPath {
  TimeGrid grid;
  VectorXd x;
  VectorXd k;
};

/// Mean-reflected ODE by explicit Euler:
///   U_{j+1} = U_j + b(X_j) dt,  K_{j+1} = max(K_j, max(0, r* - U_{j+1})),
///   X = U + K,
/// using G0(delta_u) = max(0, r* - u) for Dirac laws.
DeterministicPath solve_mr_ode(const ModelSpec& spec, const TimeGrid& grid);

/// Skeleton equation dY = (b(Y) + sigma(Y) phi) dt + dK0 with K0 fixed.
/// The result's k echoes k0.
DeterministicPath solve_skeleton(const ModelSpec& spec, const TimeGrid& grid, const ControlPath& phi,
                                 const VectorXd& k0);

/// Short-time skeleton dY = sigma(Y) phi dt on [0, 1]; no drift, no reflection.
DeterministicPath solve_short_skeleton(const ModelSpec& spec, const TimeGrid& grid,
                                       const ControlPath& phi);

}  // namespace mrsde
