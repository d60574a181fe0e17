#pragma once

namespace wavefdi {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly.
double gamma_q(double a, double x);

double chi2_cdf(double x, int dof);
/// Upper tail probability.
double chi2_sf(double x, int dof);

/// Threshold lambda with chi2_sf(lambda, dof) = alpha, to |error| < 1e-10.
double chi2_threshold(double alpha, int dof);

}  // namespace wavefdi
