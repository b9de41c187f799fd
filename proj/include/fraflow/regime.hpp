#pragma once

#include <string>

namespace fraflow {

enum class Verdict { local_existence, small_data_global, small_data_global_critical, global, outside_theory };

std::string to_string(Verdict v);

/// Exponent arithmetic for  d_t^alpha (u - u0) - Delta_p u - |u|^{q-2} u = f  in d space dimensions.
/// Infinite exponents are represented by +inf.
struct RegimeReport {
  double p = 0.0, q = 0.0;
  int d = 1;
  double p_star = 0.0;    // dp / (d - p)_+
  double two_star = 0.0;  // 2d / (d - 2)_+
  double r_cz = 0.0;      // 2*(p - 1)
  bool theta_needed = false;  // 2(q - 1) > p*
  double theta = 0.0;         // solves 1/(2(q-1)) = theta (1/r_cz - 1/d) + (1 - theta)/p*
  bool theta_in_range = true;
  bool theta_condition = true;  // theta (q-1)/(p-1) < 1
  bool compact_embedding = false;  // p > 2d/(d+2)
  bool local_existence = false;    // compact_embedding and q < p*
  Verdict verdict = Verdict::outside_theory;
  std::string condition;
};

RegimeReport classify_regime(double p, double q, int d);

/// Exponents of the structural bounds for the Dirichlet energy / power potential pair:
/// m2(r) = c r^{m2_exponent}, M2(r) = c r^{M2_exponent}, A3 growth r^{a3_exponent}.
/// Constants are unknown and kept as unit placeholders.
struct AssumptionProfile {
  double m2_exponent = 0.0;
  double M2_exponent = 0.0;
  double a3_exponent = 0.0;
  double m2_constant = 1.0, M2_constant = 1.0, nu2 = 1.0, nu3 = 1.0, c1 = 1.0;
  bool ratio_vanishes_at_zero = false;  // M2(r)/m2(r) -> 0 as r -> 0
};

AssumptionProfile assumption_profile(const RegimeReport& report);

}  // namespace fraflow
