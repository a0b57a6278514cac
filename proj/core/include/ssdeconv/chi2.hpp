#pragma once

namespace ssdeconv {

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

double chi2_cdf(int dof, double x);

/// p-quantile of chi^2_dof, absolute tolerance 1e-9. Requires dof >= 1 and
/// 0 < p < 1 (p <= 0 returns 0).
double chi2_quantile(int dof, double p);

}  // namespace ssdeconv
