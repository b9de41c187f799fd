#include "fraflow/convolution.hpp"

#include <cmath>
#include <stdexcept>

namespace fraflow {

ConvWeights::ConvWeights(const Kernel& g, const TimeGrid& grid) : grid_(grid), lags_(grid.steps()) {
  const double tau = grid.tau();
  double prev = 0.0;
  for (std::size_t m = 0; m < grid.steps(); ++m) {
    const double next = g.antiderivative(static_cast<double>(m + 1) * tau);
    lags_[m] = next - prev;
    prev = next;
  }
}

ConvWeights::ConvWeights(std::vector<double> lags, const TimeGrid& grid) : grid_(grid), lags_(std::move(lags)) {
  if (lags_.size() != grid.steps()) throw std::invalid_argument("ConvWeights: lag table does not match grid");
}

Eigen::MatrixXd convolve(const ConvWeights& w, const Eigen::MatrixXd& path, Sampling sampling) {
  const auto n = static_cast<Eigen::Index>(w.grid().nodes());
  if (path.cols() != n) throw std::invalid_argument("convolve: path length does not match grid");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(path.rows(), n);
  const Eigen::Index shift = sampling == Sampling::right ? 0 : 1;
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 1; i <= j; ++i) out.col(j) += w.lag(static_cast<std::size_t>(j - i)) * path.col(i - shift);
  }
  return out;
}

Eigen::VectorXd convolve(const ConvWeights& w, const Eigen::VectorXd& path, Sampling sampling) {
  Eigen::MatrixXd row = path.transpose();
  return convolve(w, row, sampling).row(0).transpose();
}

Eigen::MatrixXd nonlocal_derivative(const ConvWeights& k_weights, const Eigen::MatrixXd& v) {
  const auto n = static_cast<Eigen::Index>(k_weights.grid().nodes());
  if (v.cols() != n) throw std::invalid_argument("nonlocal_derivative: path length does not match grid");
  const double tau = k_weights.grid().tau();
  Eigen::MatrixXd dv(v.rows(), n);
  dv.col(0).setZero();
  for (Eigen::Index i = 1; i < n; ++i) dv.col(i) = v.col(i) - v.col(i - 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.rows(), n);
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 1; i <= j; ++i) out.col(j) += k_weights.lag(static_cast<std::size_t>(j - i)) * dv.col(i);
    out.col(j) /= tau;
  }
  return out;
}

Eigen::VectorXd nonlocal_derivative(const ConvWeights& k_weights, const Eigen::VectorXd& v) {
  Eigen::MatrixXd row = v.transpose();
  return nonlocal_derivative(k_weights, row).row(0).transpose();
}

ConvWeights discrete_conjugate(const ConvWeights& k_weights) {
  const auto& b = k_weights.lags();
  if (b.empty() || !(b[0] > 0.0)) throw std::invalid_argument("discrete_conjugate: leading weight must be positive");
  const double tau = k_weights.grid().tau();
  std::vector<double> c(b.size(), 0.0);
  for (std::size_t n = 0; n < b.size(); ++n) {
    double acc = tau;
    for (std::size_t m = 1; m <= n; ++m) acc -= c[n - m] * b[m];
    c[n] = acc / b[0];
  }
  return ConvWeights(std::move(c), k_weights.grid());
}

}  // namespace fraflow
