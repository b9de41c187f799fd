#pragma once

#include <cstddef>

namespace fraflow {

/// Uniform grid t_j = j * tau, j = 0..N, on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return steps_ + 1; }
  double tau() const noexcept { return tau_; }
  double time(std::size_t j) const noexcept { return static_cast<double>(j) * tau_; }

  /// Same horizon, steps multiplied by `factor`.
  TimeGrid refined(std::size_t factor = 2) const;

 private:
  double horizon_;
  std::size_t steps_;
  double tau_;
};

}  // namespace fraflow
