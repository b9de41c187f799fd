#include "fraflow/time_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace fraflow {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps), tau_(0.0) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("TimeGrid: horizon must be positive");
  if (steps == 0) throw std::invalid_argument("TimeGrid: need at least one step");
  tau_ = horizon / static_cast<double>(steps);
}

TimeGrid TimeGrid::refined(std::size_t factor) const {
  if (factor == 0) throw std::invalid_argument("TimeGrid::refined: factor must be positive");
  return TimeGrid(horizon_, steps_ * factor);
}

}  // namespace fraflow
