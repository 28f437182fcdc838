#pragma once

namespace subsphere {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

/// CDF of the chi-squared distribution with `dof` degrees of freedom.
double chi_squared_cdf(double x, int dof);

/// Inverse CDF by bisection; |CDF(result) - level| < 1e-10.
double chi_squared_quantile(double level, int dof);

}  // namespace subsphere
