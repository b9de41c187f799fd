#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "fraflow/kernel.hpp"
#include "fraflow/time_grid.hpp"

namespace fraflow {

/// s_n solving s_n + n (ell * s_n) = 1 on the grid, and k_n = n s_n.
struct RegularizedKernel {
  double n = 0.0;
  TimeGrid grid;
  Eigen::VectorXd s;    // s_n(t_j)
  Eigen::VectorXd k_n;  // n s_n(t_j); k_n(0) = n
};

RegularizedKernel regularized_kernel(const Kernel& ell, double n, const TimeGrid& grid);

/// int_0^T |k_n - k| dt with k_n constant on each cell (right-endpoint value),
/// integrated exactly against the antiderivative of k. k must be nonincreasing.
double l1_distance(const RegularizedKernel& kn, const Kernel& k);

struct SonineCertificate {
  double max_error = 0.0;        // finer level, nodes with t >= window_start
  double coarse_error = 0.0;     // coarser level, same window
  double all_nodes_error = 0.0;  // finer level, every node t_j > 0
  std::size_t worst_node = 0;    // index on the finer grid
  double observed_order = 0.0;   // log2(coarse / fine)
  double window_start = 0.0;
  std::size_t coarse_steps = 0;
  std::size_t fine_steps = 0;
  bool passed = false;
};

/// Checks (k * ell)(t_j) = 1 with exact k-weights and cell-averaged ell samples
/// on `grid` and on its refinement; passes iff the finer-level error is <= tol.
/// Nodes before `window_start` (default T/16) are excluded: near t = 0 the error
/// of a scale-invariant pair does not shrink under refinement.
SonineCertificate verify_sonine(const SoninePair& pair, const TimeGrid& grid, double tol,
                                double window_start = -1.0);

}  // namespace fraflow
