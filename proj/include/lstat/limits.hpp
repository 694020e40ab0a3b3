#pragma once

// Closed-form limiting laws of ordered squared t-statistics under the null:
// the Gumbel-type law of the s-th largest square and the joint law of the
// top k squares (both centered by b_p), and the normal-limit constants of
// T_ceil(gamma p) for diagonal covariance.

#include <cstddef>
#include <span>

#include "lstat/numstat.hpp"

namespace ltest {

/// b_p = 2 log p - log log p. Requires p >= 3.
double gumbel_centering(std::size_t p);

/// lambda(x) = pi^{-1/2} exp(-x/2) = -log Lambda(x): the Poisson intensity
/// of limit points above x.
double gumbel_intensity(double x) noexcept;

/// Lambda(x) = exp(-pi^{-1/2} exp(-x/2)).
Probability lambda_cdf(double x) noexcept;

/// Limit CDF of (s-th largest t^2) - b_p:
/// Lambda(x) * sum_{i<s} (log Lambda^{-1}(x))^i / i!, i.e. P(Poisson(lambda(x)) <= s-1).
Probability sth_max_cdf(double x, unsigned s);

/// Limit joint CDF of the top-k centered squares at x_1 >= ... >= x_k.
/// Exact pruned enumeration over the constrained multiplicity tuples; k <= 12.
Probability joint_topk_cdf(std::span<const double> xs);

inline constexpr std::size_t kJointTopkMax = 12;

/// Normal-limit constants for T_ceil(gamma p) with diagonal covariance.
struct GammaConstants {
  double gamma = 1.0;
  double z = 0.0;             // upper gamma/2 normal point
  double v_gamma = 0.0;       // (1 - gamma) quantile of chi^2_1, = z^2
  double partial_mean = 1.0;  // E[Z^2 1{Z^2 >= v}] = 2 z phi(z) + gamma
  double mu_gamma = 1.0;      // E[Z^2 | Z^2 >= v] = partial_mean / gamma
  double sigma_gg = 2.0;      // var{(Z^2 - v) 1{Z^2 >= v}}
};

GammaConstants gamma_constants(double gamma);

/// (T_k - p gamma mu_gamma) / sqrt(p sigma_gg) using the diagonal-covariance
/// constants. Valid as a calibration only when the covariance is diagonal.
double normal_limit_zscore(double t_k, std::size_t p, const GammaConstants& gc);

}  // namespace ltest
