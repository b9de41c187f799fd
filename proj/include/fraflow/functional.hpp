#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraflow {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Scaled Euclidean inner product <a, b> = weight * a.b (weight = cell volume).
struct Metric {
  double weight = 1.0;

  double dot(const Vector& a, const Vector& b) const { return weight * a.dot(b); }
  double norm(const Vector& a) const { return std::sqrt(weight) * a.norm(); }
};

struct ProxOptions {
  double tolerance = 1e-8;  // on the optimality residual (metric norm)
  int max_iterations = 200;
};

struct ProxResult {
  Vector point;
  double residual = 0.0;
  int iterations = 0;
};

class ProxError : public std::runtime_error {
 public:
  ProxError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Proper, convex, lower semicontinuous functional on R^m with the metric above.
class Functional {
 public:
  explicit Functional(Metric metric = {}) : metric_(metric) {}
  virtual ~Functional() = default;

  virtual std::string name() const = 0;
  /// +inf outside the effective domain.
  virtual double value(const Vector& w) const = 0;
  virtual bool in_domain(const Vector& w) const { return std::isfinite(value(w)); }
  /// argmin_z |z - w|^2 / (2 lambda) + phi(z).
  virtual ProxResult prox(double lambda, const Vector& w, const ProxOptions& opts) const = 0;

  const Metric& metric() const noexcept { return metric_; }

 private:
  Metric metric_;
};

/// Differentiable functional; gradient and Hessian are taken w.r.t. the metric.
/// The default prox is a damped Newton iteration.
class SmoothFunctional : public Functional {
 public:
  using Functional::Functional;

  virtual Vector gradient(const Vector& z) const = 0;
  virtual SparseMatrix hessian(const Vector& z) const = 0;
  ProxResult prox(double lambda, const Vector& w, const ProxOptions& opts) const override;

 protected:
  ProxResult newton_prox(double lambda, const Vector& w, Vector start, const ProxOptions& opts) const;
};

ProxResult resolvent(const Functional& phi, double lambda, const Vector& w, const ProxOptions& opts = {});

struct YosidaEval {
  double lambda = 0.0;
  ProxResult resolvent;  // J_lambda w
  Vector yosida;         // A_lambda w = (w - J_lambda w) / lambda
  double envelope = 0.0; // phi_lambda(w) = lambda/2 |A_lambda w|^2 + phi(J_lambda w)
};

YosidaEval yosida(const Functional& phi, double lambda, const Vector& w, const ProxOptions& opts = {});

struct MinimalSection {
  Vector value;
  std::vector<double> lambdas;
  std::vector<double> increments;  // |A_{lambda_k} w - A_{lambda_{k-1}} w|
  bool converged = false;          // Cauchy up to tolerance before the sequence ran out
};

std::vector<double> default_lambda_sequence();

/// Limit of A_lambda w along a decreasing lambda sequence.
MinimalSection minimal_section(const Functional& phi, const Vector& w,
                               const std::vector<double>& lambdas = default_lambda_sequence(), double tol = 1e-6,
                               const ProxOptions& opts = {});

// Built-ins.

/// (1/2) |w - center|^2.
class QuadraticEnergy : public SmoothFunctional {
 public:
  explicit QuadraticEnergy(Metric metric = {}, Vector center = {});
  std::string name() const override { return "quadratic"; }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& z) const override;
  SparseMatrix hessian(const Vector& z) const override;
  ProxResult prox(double lambda, const Vector& w, const ProxOptions& opts) const override;

 private:
  Vector center_;
  Vector shifted(const Vector& w) const;
};

/// (1/q) sum_i weight |w_i|^q, q > 1.
class PowerPotential : public SmoothFunctional {
 public:
  PowerPotential(Metric metric, double q);
  std::string name() const override { return "power"; }
  double exponent() const noexcept { return q_; }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& z) const override;
  SparseMatrix hessian(const Vector& z) const override;
  ProxResult prox(double lambda, const Vector& w, const ProxOptions& opts) const override;

 private:
  double q_;
};

/// c * sum_i weight |w_i|.
class L1Norm : public Functional {
 public:
  explicit L1Norm(Metric metric = {}, double scale = 1.0);
  std::string name() const override { return "l1"; }
  double value(const Vector& w) const override;
  ProxResult prox(double lambda, const Vector& w, const ProxOptions& opts) const override;

 private:
  double scale_;
};

/// Indicator of [lower, upper]^m.
class BoxIndicator : public Functional {
 public:
  BoxIndicator(Metric metric, double lower, double upper);
  std::string name() const override { return "box"; }
  double value(const Vector& w) const override;
  ProxResult prox(double lambda, const Vector& w, const ProxOptions& opts) const override;

 private:
  double lower_;
  double upper_;
};

/// Scalar root of s + lambda s^{q-1} = r for r >= 0.
double power_prox_scalar(double r, double lambda, double q);

}  // namespace fraflow
