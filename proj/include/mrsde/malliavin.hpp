#pragma once

#include <cstdint>

#include "mrsde/control.hpp"
#include "mrsde/grid.hpp"
#include "mrsde/model.hpp"

namespace mrsde {

/// One simulated X path with its first variation Y (Y_0 = 1) and inverse
/// variation Z (Z_0 = 1), all driven by the same increments. K is an input
/// here: it is a functional of the law, so it does not move when the
/// driving noise of a single path is perturbed.
struct TangentBundle {
  TimeGrid grid;
  double epsilon = 1.0;
  VectorXd k_path;
  VectorXd increments;  // Delta B_j, j < n_steps
  VectorXd x;
  VectorXd y;
  VectorXd z;
  VectorXd sigma_x;  // sqrt(eps) sigma(x_j)
};

/// The grid matrix d(j, k) = D_{t_j} X_{t_k}; zero below the diagonal.
struct MalliavinKernel {
  TimeGrid grid;
  MatrixXd d;
};

/// Euler for X, Y and Z with shared noise (particle index `path` of the
/// counter-based stream with this seed):
///   Y_{j+1} = Y_j (1 + b'(X_j) dt + s'(X_j) dB_j)
///   Z_{j+1} = Z_j (1 - s'(X_j) dB_j - (b'(X_j) - s'(X_j)^2) dt)
/// with s = sqrt(eps) sigma.
TangentBundle tangent_simulate(const ModelSpec& spec, const TimeGrid& grid, const VectorXd& k_path,
                               std::uint64_t seed, double epsilon = 1.0, std::uint64_t path = 0);

/// K path to freeze into single-path runs: the reflection of an ensemble of
/// `n_particles` on the same grid, or the Dirac reflection when sigma = 0.
VectorXd frozen_reflection(const ModelSpec& spec, const TimeGrid& grid, Index n_particles,
                           std::uint64_t seed, int workers = 1);

/// d(j, k) = y_k z_j sigma(x_j) above the diagonal, sigma(x_j) on it.
MalliavinKernel kernel_product(const TangentBundle& bundle);

/// Euler solve of the linear equation for D_{t_r} X from t_r with the
/// bundle's increments. Entry k holds D_{t_r} X_{t_k}; entries k < r are 0.
VectorXd kernel_direct(const ModelSpec& spec, const TangentBundle& bundle, Index r_index);

/// <DX_t, DX_t> by the left Riemann sum sum_{j < t} d(j, t)^2 dt.
double malliavin_covariance(const MalliavinKernel& kernel, Index t_index);

struct CameronMartinReport {
  double fd_derivative = 0.0;
  double kernel_pairing = 0.0;
  double abs_error = 0.0;
};

/// Directional derivative of X_T along increments shifted by bump k(t_j) dt,
/// with K frozen, against sum_j d(j, T) k(t_j) dt.
CameronMartinReport cameron_martin_check(const ModelSpec& spec, const TangentBundle& bundle,
                                         const ControlPath& direction, double bump);

struct DensityGrid {
  VectorXd x;
  VectorXd f;
};

inline constexpr Index kDensityPoints = 512;

/// Gaussian kernel density estimate on 512 uniform points spanning
/// [min - 3 bandwidth, max + 3 bandwidth].
DensityGrid density_estimate(const VectorXd& samples, double bandwidth);

/// Trapezoid integral of a density grid.
double trapezoid(const DensityGrid& density);

/// Picard iterates Y^{n+1} = xi + int b(Y^n) + int sigma(Y^n) dB + K on the
/// bundle's noise, starting from Y^0 = xi + K. Returns sup_k |Y^n_k - x_k|
/// for n = 0..n_iter.
VectorXd picard_sup_errors(const ModelSpec& spec, const TangentBundle& bundle, int n_iter);

}  // namespace mrsde
