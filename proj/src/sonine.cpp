#include "fraflow/sonine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fraflow/convolution.hpp"

namespace fraflow {

RegularizedKernel regularized_kernel(const Kernel& ell, double n, const TimeGrid& grid) {
  if (!(n > 0.0)) throw std::invalid_argument("regularized_kernel: n must be positive");
  const ConvWeights w(ell, grid);
  const std::size_t nodes = grid.nodes();
  Eigen::VectorXd s(nodes);
  s(0) = 1.0;
  const double diag = 1.0 + n * w.lag(0);
  for (std::size_t j = 1; j < nodes; ++j) {
    double hist = 0.0;
    for (std::size_t i = 1; i < j; ++i) hist += w.lag(j - i) * s(i);
    s(j) = (1.0 - n * hist) / diag;
  }
  return RegularizedKernel{n, grid, s, n * s};
}

double l1_distance(const RegularizedKernel& kn, const Kernel& k) {
  // k_n is read as piecewise constant with value k_n(t_i) on (t_{i-1}, t_i], the
  // collocation used to compute it; each cell integral of |c - k| is exact through K.
  const TimeGrid& g = kn.grid;
  double total = 0.0;
  for (std::size_t i = 1; i < g.nodes(); ++i) {
    const double a = g.time(i - 1);
    const double b = g.time(i);
    const double c = kn.k_n(static_cast<Eigen::Index>(i));
    const double ka = a > 0.0 ? k(a) : std::numeric_limits<double>::infinity();
    const double kb = k(b);
    const double cell = k.antiderivative(b) - k.antiderivative(a);
    if (c >= ka) {
      total += c * (b - a) - cell;
    } else if (c <= kb) {
      total += cell - c * (b - a);
    } else {
      double lo = a, hi = b;  // k > c left of the crossing
      for (int it = 0; it < 200 && hi - lo > 1e-16 * b; ++it) {
        const double mid = 0.5 * (lo + hi);
        (k(mid) > c ? lo : hi) = mid;
      }
      const double x = 0.5 * (lo + hi);
      const double left = k.antiderivative(x) - k.antiderivative(a);
      const double right = k.antiderivative(b) - k.antiderivative(x);
      total += (left - c * (x - a)) + (c * (b - x) - right);
    }
  }
  return total;
}

namespace {

struct LevelError {
  double windowed = 0.0;
  double all = 0.0;
  std::size_t worst = 0;
};

LevelError sonine_error(const SoninePair& pair, const TimeGrid& grid, double window_start) {
  const ConvWeights kw(pair.k, grid);
  const double tau = grid.tau();
  Eigen::VectorXd ell(grid.nodes());
  ell(0) = 0.0;
  for (std::size_t i = 1; i < grid.nodes(); ++i)
    ell(static_cast<Eigen::Index>(i)) = (pair.ell.antiderivative(grid.time(i)) - pair.ell.antiderivative(grid.time(i - 1))) / tau;
  const Eigen::VectorXd conv = convolve(kw, ell, Sampling::right);
  LevelError e;
  for (std::size_t j = 1; j < grid.nodes(); ++j) {
    const double err = std::abs(conv(static_cast<Eigen::Index>(j)) - 1.0);
    e.all = std::max(e.all, err);
    if (grid.time(j) >= window_start - 1e-14 * grid.horizon() && err >= e.windowed) {
      e.windowed = err;
      e.worst = j;
    }
  }
  return e;
}

}  // namespace

SonineCertificate verify_sonine(const SoninePair& pair, const TimeGrid& grid, double tol, double window_start) {
  if (window_start < 0.0) window_start = grid.horizon() / 16.0;
  const TimeGrid fine = grid.refined(2);
  const LevelError c = sonine_error(pair, grid, window_start);
  const LevelError f = sonine_error(pair, fine, window_start);
  SonineCertificate cert;
  cert.max_error = f.windowed;
  cert.coarse_error = c.windowed;
  cert.all_nodes_error = f.all;
  cert.worst_node = f.worst;
  cert.window_start = window_start;
  cert.coarse_steps = grid.steps();
  cert.fine_steps = fine.steps();
  cert.observed_order = (f.windowed > 0.0 && c.windowed > 0.0) ? std::log2(c.windowed / f.windowed)
                                                                : std::numeric_limits<double>::infinity();
  cert.passed = std::isfinite(cert.max_error) && cert.max_error <= tol;
  return cert;
}

}  // namespace fraflow
