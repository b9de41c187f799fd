#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fraflow {

enum class KernelKind : unsigned { riemann_liouville = 0, constant = 1, zero = 2, sampled = 3, custom = 4 };

std::string to_string(KernelKind kind);

/// Nonnegative, nonincreasing, locally integrable kernel on (0, inf) with its
/// antiderivative K(t) = int_0^t k.
class Kernel {
 public:
  using Fn = std::function<double(double)>;

  Kernel(Fn value, Fn antiderivative, bool singular, KernelKind kind, double parameter = 0.0);

  /// Builds the antiderivative by adaptive quadrature.
  static Kernel from_function(Fn value, bool singular);

  double operator()(double t) const { return value_(t); }
  double antiderivative(double t) const { return t <= 0.0 ? 0.0 : antiderivative_(t); }
  bool singular() const noexcept { return singular_; }
  KernelKind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return parameter_; }

 private:
  Fn value_;
  Fn antiderivative_;
  bool singular_;
  KernelKind kind_;
  double parameter_;
};

/// k(t) = t^{-beta} / Gamma(1 - beta), 0 <= beta < 1.
Kernel riemann_liouville_kernel(double beta);
Kernel constant_kernel(double c);
Kernel zero_kernel();
/// Piecewise-linear interpolant of (times, values), extended constantly past the
/// last sample; `times` must start at 0 and increase strictly.
Kernel sampled_kernel(std::vector<double> times, std::vector<double> values);

/// Kernels with k * ell = 1 on (0, inf).
struct SoninePair {
  Kernel k;
  Kernel ell;
  std::optional<double> order;
};

/// k = t^{-alpha}/Gamma(1-alpha), ell = t^{alpha-1}/Gamma(alpha); alpha in (0, 1).
SoninePair rl_pair(double alpha);

/// The pair is only formally Sonine; useful as a negative control.
SoninePair constant_pair(double c);

}  // namespace fraflow
