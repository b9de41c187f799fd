#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fraflow/kernel.hpp"
#include "fraflow/time_grid.hpp"

namespace fraflow {

/// Which node of each cell [t_{i-1}, t_i] carries the sampled value.
enum class Sampling { right, left };

/// Product-integration weights on a uniform grid. They depend only on the lag:
/// w_{j,i} = int_{t_{i-1}}^{t_i} g(t_j - s) ds = G((j-i+1) tau) - G((j-i) tau).
class ConvWeights {
 public:
  ConvWeights(const Kernel& g, const TimeGrid& grid);
  /// Lag table supplied directly, e.g. a discrete conjugate.
  ConvWeights(std::vector<double> lags, const TimeGrid& grid);

  const TimeGrid& grid() const noexcept { return grid_; }
  double lag(std::size_t m) const { return lags_.at(m); }
  double weight(std::size_t j, std::size_t i) const { return lags_.at(j - i); }
  const std::vector<double>& lags() const noexcept { return lags_; }

 private:
  TimeGrid grid_;
  std::vector<double> lags_;  // lags_[m] for m = 0..N-1
};

/// Paths are stored one node per column: rows = state dimension, cols = N + 1.
Eigen::MatrixXd convolve(const ConvWeights& w, const Eigen::MatrixXd& path, Sampling sampling = Sampling::right);
Eigen::VectorXd convolve(const ConvWeights& w, const Eigen::VectorXd& path, Sampling sampling = Sampling::right);

/// Discrete d/dt (k * v) with v shifted so that v(t_0) = 0. Column 0 is zero.
/// Equivalent to tau B_j = sum_{i=1}^j b_{j-i} (v_i - v_{i-1}).
Eigen::MatrixXd nonlocal_derivative(const ConvWeights& k_weights, const Eigen::MatrixXd& v);
Eigen::VectorXd nonlocal_derivative(const ConvWeights& k_weights, const Eigen::VectorXd& v);

/// Lags c with sum_{m=0}^n c_{n-m} b_m = tau for every n, i.e. the exact discrete
/// partner of the k-weights: (c * B(v))_j = v_j - v_0 under right sampling.
/// Requires b_0 > 0.
ConvWeights discrete_conjugate(const ConvWeights& k_weights);

}  // namespace fraflow
