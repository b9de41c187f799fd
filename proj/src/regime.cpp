#include "fraflow/regime.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fraflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inv(double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }

// a / (b)_+ with a / 0 = inf.
double over_positive_part(double a, double b) { return b > 0.0 ? a / b : kInf; }

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::local_existence: return "local_existence";
    case Verdict::small_data_global: return "small_data_global";
    case Verdict::small_data_global_critical: return "small_data_global_critical";
    case Verdict::global: return "global";
    case Verdict::outside_theory: return "outside_theory";
  }
  return "unknown";
}

RegimeReport classify_regime(double p, double q, int d) {
  if (!(p > 1.0) || !(q > 1.0) || d < 1) throw std::invalid_argument("classify_regime: need p, q > 1 and d >= 1");
  RegimeReport r;
  r.p = p;
  r.q = q;
  r.d = d;
  const double dd = d;
  r.p_star = over_positive_part(dd * p, dd - p);
  r.two_star = over_positive_part(2.0 * dd, dd - 2.0);
  r.r_cz = r.two_star * (p - 1.0);

  r.theta_needed = 2.0 * (q - 1.0) > r.p_star;
  if (r.theta_needed) {
    const double denom = inv(r.r_cz) - 1.0 / dd - inv(r.p_star);
    r.theta = (1.0 / (2.0 * (q - 1.0)) - inv(r.p_star)) / denom;
    r.theta_in_range = r.theta > 0.0 && r.theta < 1.0;
    r.theta_condition = r.theta * (q - 1.0) / (p - 1.0) < 1.0;
  }

  r.compact_embedding = p > 2.0 * dd / (dd + 2.0);
  r.local_existence = r.compact_embedding && q < r.p_star;

  if (!r.compact_embedding) {
    r.verdict = Verdict::outside_theory;
    r.condition = "p <= 2d/(d+2)";
  } else if (q > r.p_star) {
    r.verdict = Verdict::outside_theory;
    r.condition = "q > p*";
  } else if (q == r.p_star) {
    r.verdict = Verdict::small_data_global_critical;
    r.condition = "p < q = p*";
  } else if (q > p) {
    r.verdict = Verdict::small_data_global;
    r.condition = "p < q < p*";
  } else if (q < p) {
    r.verdict = Verdict::global;
    r.condition = "q < p and q < p*";
  } else {
    r.verdict = Verdict::local_existence;
    r.condition = "q = p < p*";
  }
  return r;
}

AssumptionProfile assumption_profile(const RegimeReport& r) {
  AssumptionProfile a;
  a.m2_exponent = (r.p - 1.0) / r.p;
  if (!r.theta_needed) {
    a.M2_exponent = (r.q - 1.0) / r.p;
  } else {
    const double lead = r.theta * (r.q - 1.0) / (r.p - 1.0);
    a.M2_exponent = lead < 1.0 ? (1.0 - r.theta) * (r.q - 1.0) / (r.p * (1.0 - lead)) : kInf;
  }
  a.a3_exponent = r.q / r.p;
  a.ratio_vanishes_at_zero = a.M2_exponent > a.m2_exponent;
  return a;
}

}  // namespace fraflow
