#pragma once

namespace fraflow {

/// E_alpha(z) for alpha in (0, 1] and z <= 0.
/// Power series in long double for |z| <= 1, Laplace-type integral otherwise.
double mittag_leffler(double alpha, double z);

/// Scalar relaxation u' ~ -u of order alpha: u(t) = E_alpha(-t^alpha).
double mittag_leffler_relaxation(double alpha, double t);

}  // namespace fraflow
