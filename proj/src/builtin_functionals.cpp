#include <algorithm>
#include <cmath>

#include "fraflow/functional.hpp"

namespace fraflow {

namespace {

SparseMatrix diagonal(const Vector& d) {
  SparseMatrix m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Eigen::Index i = 0; i < d.size(); ++i) m.insert(i, i) = d(i);
  m.makeCompressed();
  return m;
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("prox: lambda must be positive");
}

}  // namespace

QuadraticEnergy::QuadraticEnergy(Metric metric, Vector center) : SmoothFunctional(metric), center_(std::move(center)) {}

Vector QuadraticEnergy::shifted(const Vector& w) const {
  if (center_.size() == 0) return w;
  if (center_.size() != w.size()) throw std::invalid_argument("QuadraticEnergy: dimension mismatch");
  return w - center_;
}

double QuadraticEnergy::value(const Vector& w) const {
  const Vector d = shifted(w);
  return 0.5 * metric().dot(d, d);
}

Vector QuadraticEnergy::gradient(const Vector& z) const { return shifted(z); }

SparseMatrix QuadraticEnergy::hessian(const Vector& z) const { return diagonal(Vector::Ones(z.size())); }

ProxResult QuadraticEnergy::prox(double lambda, const Vector& w, const ProxOptions&) const {
  check_lambda(lambda);
  Vector z = center_.size() == 0 ? Vector(w / (1.0 + lambda)) : Vector((w + lambda * center_) / (1.0 + lambda));
  return ProxResult{z, 0.0, 0};
}

double power_prox_scalar(double r, double lambda, double q) {
  if (r <= 0.0) return 0.0;
  if (q == 2.0) return r / (1.0 + lambda);
  // g(s) = s + lambda s^{q-1} - r is increasing on [0, r] with g(0) < 0 <= g(r).
  double lo = 0.0, hi = r;
  double s = r / (1.0 + lambda);  // exact for q = 2, a reasonable start otherwise
  s = std::min(s, std::pow(r / lambda, 1.0 / (q - 1.0)));
  for (int it = 0; it < 200; ++it) {
    const double sq = std::pow(s, q - 2.0);
    const double g = s + lambda * sq * s - r;
    if (g == 0.0) return s;
    (g < 0.0 ? lo : hi) = s;
    const double dg = 1.0 + lambda * (q - 1.0) * sq;
    double next = s - g / dg;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 2.0 * std::numeric_limits<double>::epsilon() * s || hi - lo <= 4e-16 * hi) return next;
    s = next;
  }
  return s;
}

PowerPotential::PowerPotential(Metric metric, double q) : SmoothFunctional(metric), q_(q) {
  if (!(q > 1.0)) throw std::invalid_argument("PowerPotential: exponent must exceed 1");
}

double PowerPotential::value(const Vector& w) const {
  return metric().weight / q_ * w.array().abs().pow(q_).sum();
}

Vector PowerPotential::gradient(const Vector& z) const {
  return z.unaryExpr([q = q_](double x) { return x == 0.0 ? 0.0 : std::pow(std::abs(x), q - 2.0) * x; });
}

SparseMatrix PowerPotential::hessian(const Vector& z) const {
  return diagonal(z.unaryExpr([q = q_](double x) {
    if (x == 0.0) return q == 2.0 ? 1.0 : (q > 2.0 ? 0.0 : 1e300);
    return (q - 1.0) * std::pow(std::abs(x), q - 2.0);
  }));
}

ProxResult PowerPotential::prox(double lambda, const Vector& w, const ProxOptions&) const {
  check_lambda(lambda);
  Vector z(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double s = power_prox_scalar(std::abs(w(i)), lambda, q_);
    z(i) = std::copysign(s, w(i));
  }
  const Vector r = (z - w) / lambda + gradient(z);
  return ProxResult{z, metric().norm(r), 0};
}

L1Norm::L1Norm(Metric metric, double scale) : Functional(metric), scale_(scale) {
  if (!(scale >= 0.0)) throw std::invalid_argument("L1Norm: scale must be nonnegative");
}

double L1Norm::value(const Vector& w) const { return scale_ * metric().weight * w.lpNorm<1>(); }

ProxResult L1Norm::prox(double lambda, const Vector& w, const ProxOptions&) const {
  check_lambda(lambda);
  const double t = lambda * scale_;
  Vector z = w.unaryExpr([t](double x) { return std::copysign(std::max(std::abs(x) - t, 0.0), x); });
  return ProxResult{z, 0.0, 0};
}

BoxIndicator::BoxIndicator(Metric metric, double lower, double upper)
    : Functional(metric), lower_(lower), upper_(upper) {
  if (!(lower <= upper)) throw std::invalid_argument("BoxIndicator: empty box");
}

double BoxIndicator::value(const Vector& w) const {
  const bool inside = (w.array() >= lower_).all() && (w.array() <= upper_).all();
  return inside ? 0.0 : std::numeric_limits<double>::infinity();
}

ProxResult BoxIndicator::prox(double lambda, const Vector& w, const ProxOptions&) const {
  check_lambda(lambda);
  return ProxResult{w.cwiseMax(lower_).cwiseMin(upper_), 0.0, 0};
}

}  // namespace fraflow
