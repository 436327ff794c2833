#pragma once

#include <optional>
#include <stdexcept>

#include "mrsde/grid.hpp"

namespace mrsde {

/// Control phi, constant on each cell [t_k, t_{k+1}).
class ControlPath {
 public:
  ControlPath(TimeGrid grid, VectorXd phi, std::optional<double> energy_bound = std::nullopt)
      : grid_(grid), phi_(std::move(phi)), bound_(energy_bound) {
    if (phi_.size() != grid_.n_steps())
      throw std::invalid_argument("ControlPath needs one value per grid cell");
    if (bound_ && energy() > *bound_)
      throw std::invalid_argument("ControlPath energy exceeds its declared bound");
  }

  static ControlPath zero(const TimeGrid& grid) {
    return ControlPath(grid, VectorXd::Zero(grid.n_steps()));
  }
  static ControlPath constant(const TimeGrid& grid, double c) {
    return ControlPath(grid, VectorXd::Constant(grid.n_steps(), c));
  }

  const TimeGrid& grid() const { return grid_; }
  const VectorXd& phi() const { return phi_; }
  double operator[](Index k) const { return phi_[k]; }
  std::optional<double> energy_bound() const { return bound_; }

  /// (1/2) sum_k phi_k^2 dt
  double energy() const { return 0.5 * phi_.squaredNorm() * grid_.dt(); }

  ControlPath scaled(double factor) const { return ControlPath(grid_, factor * phi_); }

 private:
  TimeGrid grid_;
  VectorXd phi_;
  std::optional<double> bound_;
};

}  // namespace mrsde
