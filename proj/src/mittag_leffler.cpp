#include "fraflow/mittag_leffler.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fraflow/quadrature.hpp"

namespace fraflow {

namespace {

constexpr double kSeriesLimit = 1.0;

double series(double alpha, double z) {
  long double sum = 0.0L;
  long double zk = 1.0L;
  for (int k = 0; k < 400; ++k) {
    const long double term = zk / std::tgamma(static_cast<long double>(alpha) * k + 1.0L);
    sum += term;
    if (k > 2 && std::fabs(term) <= 1e-18L * std::fabs(sum)) break;
    zk *= z;
  }
  return static_cast<double>(sum);
}

// E_a(-x) = sin(a pi)/(a pi) int_0^inf exp(-x^{1/a} s^{1/a}) / (s^2 + 2 s cos(a pi) + 1) ds.
double integral(double alpha, double x) {
  const double c = std::cos(alpha * std::numbers::pi);
  const double big_x = std::pow(x, 1.0 / alpha);
  const double inv = 1.0 / alpha;
  auto near = [&](double s) { return std::exp(-big_x * std::pow(s, inv)) / (s * s + 2.0 * s * c + 1.0); };
  // s = 1/u on [1, inf).
  auto far = [&](double u) {
    if (u <= 0.0) return 0.0;
    return std::exp(-big_x * std::pow(u, -inv)) / (1.0 + 2.0 * u * c + u * u);
  };
  const double total = integrate(near, 0.0, 1.0, 1e-17, 1e-14).value + integrate(far, 0.0, 1.0, 1e-17, 1e-14).value;
  return std::sin(alpha * std::numbers::pi) / (alpha * std::numbers::pi) * total;
}

}  // namespace

double mittag_leffler(double alpha, double z) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("mittag_leffler: alpha must lie in (0, 1]");
  if (!(z <= 0.0)) throw std::domain_error("mittag_leffler: argument must be <= 0");
  if (alpha == 1.0) return std::exp(z);
  if (-z <= kSeriesLimit) return series(alpha, z);
  return integral(alpha, -z);
}

double mittag_leffler_relaxation(double alpha, double t) {
  if (!(t >= 0.0)) throw std::domain_error("mittag_leffler_relaxation: t must be >= 0");
  return mittag_leffler(alpha, -std::pow(t, alpha));
}

}  // namespace fraflow
