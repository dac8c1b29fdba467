#pragma once

#include <vector>

namespace hetcal {

// Regularized incomplete gamma functions P(a, x) (lower) and Q(a, x) = 1 - P.
// Series expansion for x < a + 1, Lentz continued fraction otherwise.
// Absolute accuracy ~1e-14 over the supported range.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Chi-squared distribution with (possibly fractional) dof in (0, 1000].
double chi2_cdf(double x, double dof);
double chi2_sf(double x, double dof);
// Inverse of chi2_cdf, accurate to ~1e-12 relative.
double chi2_quantile(double p, double dof);

// Standard-normal helpers derived from the chi-squared machinery
// (z_{1-alpha/2}^2 is the chi^2_1 quantile at 1-alpha).
double normal_two_sided_z(double alpha);

// One-sided Mann-Whitney rank-sum test of H1: samples in `hi` are
// stochastically larger than samples in `lo`.  Exact for
// min(n_lo, n_hi) <= 10 without ties, a tie-corrected normal approximation
// with continuity correction otherwise.  Returns the p-value.
double rank_sum_p_greater(const std::vector<double>& hi,
                          const std::vector<double>& lo);

// Medians / quantiles of a sample (linear interpolation, R type 7).
double sample_quantile(std::vector<double> v, double p);
inline double sample_median(std::vector<double> v) {
  return sample_quantile(std::move(v), 0.5);
}
inline double sample_iqr(std::vector<double> v) {
  std::vector<double> w = v;
  return sample_quantile(std::move(v), 0.75) -
         sample_quantile(std::move(w), 0.25);
}

}  // namespace hetcal
