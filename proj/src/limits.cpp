#include "lstat/limits.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lstat/error.hpp"

namespace ltest {

double gumbel_centering(std::size_t p) {
  if (p < 3) throw DomainError("b_p needs p >= 3");
  const double lp = std::log(static_cast<double>(p));
  return 2.0 * lp - std::log(lp);
}

double gumbel_intensity(double x) noexcept {
  return std::exp(-0.5 * x) / std::sqrt(std::numbers::pi);
}

Probability lambda_cdf(double x) noexcept { return Probability(std::exp(-gumbel_intensity(x))); }

Probability sth_max_cdf(double x, unsigned s) {
  if (s < 1) throw DomainError("sth_max_cdf: s must be >= 1");
  if (s == 1) return lambda_cdf(x);
  const double lambda = gumbel_intensity(x);
  if (lambda == 0.0) return Probability(1.0);
  // Poisson CDF accumulated term by term in the log domain.
  const double log_lambda = std::log(lambda);
  auto term = [&](double i) { return std::exp(-lambda + i * log_lambda - std::lgamma(i + 1.0)); };
  if (lambda < s) {
    // Near 1: sum the upper tail instead so rounding stays monotone in x.
    double tail = 0.0;
    for (double i = s;; i += 1.0) {
      const double t = term(i);
      tail += t;
      if (t <= 1e-17 * tail || t == 0.0) break;
    }
    return Probability(1.0 - std::min(tail, 1.0));
  }
  double total = 0.0;
  for (unsigned i = 0; i < s; ++i) total += term(i);
  return Probability(std::min(total, 1.0));
}

namespace {

struct JointEnumeration {
  std::vector<double> log_gap;  // log(lambda_i - lambda_{i-1}), -inf for zero gaps
  double log_base = 0.0;        // -lambda_k
  double total = 0.0;

  // Position i (0-based over the gaps, gap i belongs to coordinate i + 2);
  // `used` is the running sum of multiplicities, which must stay <= i + 1.
  void visit(std::size_t i, std::size_t used, double log_term) {
    if (i == log_gap.size()) {
      total += std::exp(log_base + log_term);
      return;
    }
    const std::size_t room = i + 1 - used;
    for (std::size_t m = 0; m <= room; ++m) {
      if (m > 0 && std::isinf(log_gap[i])) break;
      const double term = m == 0 ? 0.0 : m * log_gap[i] - std::lgamma(m + 1.0);
      visit(i + 1, used + m, log_term + term);
    }
  }
};

}  // namespace

Probability joint_topk_cdf(std::span<const double> xs) {
  if (xs.size() < 2) throw DomainError("joint_topk_cdf needs k >= 2");
  if (xs.size() > kJointTopkMax) {
    throw DomainError("joint_topk_cdf: k = " + std::to_string(xs.size()) + " exceeds " +
                      std::to_string(kJointTopkMax));
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[i - 1]) throw DomainError("joint_topk_cdf: xs must be non-increasing");
  }

  std::vector<double> lambda(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) lambda[i] = gumbel_intensity(xs[i]);

  JointEnumeration e;
  e.log_base = -lambda.back();
  e.log_gap.resize(xs.size() - 1);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double gap = lambda[i] - lambda[i - 1];
    e.log_gap[i - 1] = gap > 0.0 ? std::log(gap) : -HUGE_VAL;
  }
  e.visit(0, 0, 0.0);
  return Probability(std::min(e.total, 1.0));
}

GammaConstants gamma_constants(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("gamma_constants: gamma must lie in (0, 1]");
  }
  GammaConstants gc;
  gc.gamma = gamma;
  gc.z = gamma == 1.0 ? 0.0 : norm_quantile(1.0 - 0.5 * gamma);
  const double z = gc.z;
  const double z2 = z * z;
  const double phi = norm_pdf(z);
  gc.v_gamma = z2;
  gc.partial_mean = 2.0 * z * phi + gamma;
  gc.mu_gamma = gc.partial_mean / gamma;
  const double g2 = gamma * gamma;
  gc.sigma_gg = ((6.0 - 4.0 * gamma) * z + (4.0 * gamma - 2.0) * z2 * z) * phi + 3.0 * gamma - g2 +
                2.0 * (g2 - gamma) * z2 + (gamma - g2) * z2 * z2 - 4.0 * z2 * phi * phi;
  return gc;
}

double normal_limit_zscore(double t_k, std::size_t p, const GammaConstants& gc) {
  const double pd = static_cast<double>(p);
  return (t_k - pd * gc.gamma * gc.mu_gamma) / std::sqrt(pd * gc.sigma_gg);
}

}  // namespace ltest
