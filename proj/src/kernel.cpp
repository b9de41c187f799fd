#include "fraflow/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "fraflow/quadrature.hpp"

namespace fraflow {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::riemann_liouville: return "riemann_liouville";
    case KernelKind::constant: return "constant";
    case KernelKind::zero: return "zero";
    case KernelKind::sampled: return "sampled";
    case KernelKind::custom: return "custom";
  }
  return "unknown";
}

Kernel::Kernel(Fn value, Fn antiderivative, bool singular, KernelKind kind, double parameter)
    : value_(std::move(value)),
      antiderivative_(std::move(antiderivative)),
      singular_(singular),
      kind_(kind),
      parameter_(parameter) {
  if (!value_ || !antiderivative_) throw std::invalid_argument("Kernel: empty callable");
}

Kernel Kernel::from_function(Fn value, bool singular) {
  auto fn = std::make_shared<Fn>(std::move(value));
  Fn anti = [fn, singular](double t) {
    if (t <= 0.0) return 0.0;
    return singular ? integrate_singular_left(*fn, 0.0, t).value : integrate(*fn, 0.0, t).value;
  };
  return Kernel([fn](double t) { return (*fn)(t); }, anti, singular, KernelKind::custom);
}

Kernel riemann_liouville_kernel(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("riemann_liouville_kernel: order must lie in [0, 1)");
  const double g1 = std::tgamma(1.0 - beta);
  const double g2 = std::tgamma(2.0 - beta);
  return Kernel([beta, g1](double t) { return std::pow(t, -beta) / g1; },
                [beta, g2](double t) { return std::pow(t, 1.0 - beta) / g2; }, beta > 0.0,
                KernelKind::riemann_liouville, beta);
}

Kernel constant_kernel(double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("constant_kernel: value must be nonnegative");
  return Kernel([c](double) { return c; }, [c](double t) { return c * t; }, false, KernelKind::constant, c);
}

Kernel zero_kernel() {
  return Kernel([](double) { return 0.0; }, [](double) { return 0.0; }, false, KernelKind::zero, 0.0);
}

Kernel sampled_kernel(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2)
    throw std::invalid_argument("sampled_kernel: need at least two matching samples");
  if (times.front() != 0.0) throw std::invalid_argument("sampled_kernel: first sample must be at t = 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("sampled_kernel: times must increase");
  // Cumulative integrals at the sample points.
  std::vector<double> cum(times.size(), 0.0);
  for (std::size_t i = 1; i < times.size(); ++i)
    cum[i] = cum[i - 1] + 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
  auto t_ptr = std::make_shared<const std::vector<double>>(std::move(times));
  auto v_ptr = std::make_shared<const std::vector<double>>(std::move(values));
  auto c_ptr = std::make_shared<const std::vector<double>>(std::move(cum));

  auto locate = [t_ptr](double t) {
    const auto& ts = *t_ptr;
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - ts.begin()) - 1));
  };
  Kernel::Fn value = [t_ptr, v_ptr, locate](double t) {
    const auto& ts = *t_ptr;
    const auto& vs = *v_ptr;
    if (t >= ts.back()) return vs.back();
    const std::size_t i = locate(t);
    const double s = (t - ts[i]) / (ts[i + 1] - ts[i]);
    return vs[i] + s * (vs[i + 1] - vs[i]);
  };
  Kernel::Fn anti = [t_ptr, v_ptr, c_ptr, locate](double t) {
    const auto& ts = *t_ptr;
    const auto& vs = *v_ptr;
    const auto& cs = *c_ptr;
    if (t <= 0.0) return 0.0;
    if (t >= ts.back()) return cs.back() + vs.back() * (t - ts.back());
    const std::size_t i = locate(t);
    const double d = t - ts[i];
    const double slope = (vs[i + 1] - vs[i]) / (ts[i + 1] - ts[i]);
    return cs[i] + vs[i] * d + 0.5 * slope * d * d;
  };
  return Kernel(value, anti, false, KernelKind::sampled);
}

SoninePair rl_pair(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("rl_pair: alpha must lie in (0, 1)");
  return SoninePair{riemann_liouville_kernel(alpha), riemann_liouville_kernel(1.0 - alpha), alpha};
}

SoninePair constant_pair(double c) {
  return SoninePair{constant_kernel(c), constant_kernel(c), std::nullopt};
}

}  // namespace fraflow
