#pragma once

#include <functional>

namespace fraflow {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) on a finite interval; stops at
/// max_panels subintervals and reports the error estimate it reached.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-13,
                           double rel_tol = 1e-12, int max_panels = 2000);

/// Integral over [a, b] of f with an integrable power singularity at `a`;
/// substitutes t = a + (b - a) s^4 before integrating.
QuadratureResult integrate_singular_left(const std::function<double(double)>& f, double a, double b,
                                         double abs_tol = 1e-13, double rel_tol = 1e-12);

}  // namespace fraflow
