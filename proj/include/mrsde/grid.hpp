#pragma once

#include <stdexcept>

#include "mrsde/types.hpp"

namespace mrsde {

/// Uniform grid 0 = t_0 < ... < t_n = horizon.
class TimeGrid {
 public:
  TimeGrid(double horizon, Index n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon > 0.0) || n_steps < 1)
      throw std::invalid_argument("TimeGrid needs horizon > 0 and n_steps >= 1");
  }

  double horizon() const { return horizon_; }
  Index n_steps() const { return n_steps_; }
  Index n_nodes() const { return n_steps_ + 1; }
  double dt() const { return horizon_ / static_cast<double>(n_steps_); }

  // Written as T*k/n so that t_n == T exactly.
  double node(Index k) const {
    return horizon_ * static_cast<double>(k) / static_cast<double>(n_steps_);
  }

  VectorXd nodes() const {
    VectorXd t(n_nodes());
    for (Index k = 0; k < n_nodes(); ++k) t[k] = node(k);
    return t;
  }

  bool operator==(const TimeGrid& other) const {
    return horizon_ == other.horizon_ && n_steps_ == other.n_steps_;
  }

 private:
  double horizon_;
  Index n_steps_;
};

}  // namespace mrsde
