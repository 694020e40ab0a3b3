#include "lstat/numstat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lstat/error.hpp"

namespace ltest {

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError("probability out of [0,1]: " + std::to_string(value));
  }
}

double norm_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

Probability norm_cdf(double x) noexcept {
  // erfc keeps full relative accuracy in the lower tail.
  const double v = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  return Probability(v);
}

Probability norm_sf(double x) noexcept { return norm_cdf(-x); }

namespace {

double acklam_lower(double q) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (q < p_low) {
    const double r = std::sqrt(-2.0 * std::log(q));
    return (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
           ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  const double u = q - 0.5;
  const double r = u * u;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double norm_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("norm_quantile: q must lie in (0,1), got " + std::to_string(q));
  }
  if (q > 0.5) {
    // 1 - q is exact here, and the lower tail is where the refinement is accurate.
    return -norm_quantile(1.0 - q);
  }
  double x = acklam_lower(q);
  if (x == 0.0) return 0.0;
  const double e = norm_cdf(x).value() - q;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 100000;

double log_gamma_prefactor(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < kGammaMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kGammaEps) break;
  }
  return sum * std::exp(log_gamma_prefactor(a, x));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kGammaEps) break;
  }
  return std::exp(log_gamma_prefactor(a, x)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0)) throw DomainError("incomplete gamma: shape must be positive");
  if (!(x >= 0.0)) throw DomainError("incomplete gamma: x must be non-negative");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

namespace {
void check_chisq_args(double x, unsigned df) {
  if (df == 0) throw DomainError("chi-square: df must be positive");
  if (!(x >= 0.0)) throw DomainError("chi-square: x must be non-negative");
}
}  // namespace

Probability chisq_cdf(double x, unsigned df) {
  check_chisq_args(x, df);
  return Probability(std::clamp(regularized_gamma_p(0.5 * df, 0.5 * x), 0.0, 1.0));
}

Probability chisq_sf(double x, unsigned df) {
  check_chisq_args(x, df);
  return Probability(std::clamp(regularized_gamma_q(0.5 * df, 0.5 * x), 0.0, 1.0));
}

Probability cauchy_cdf(double x) noexcept {
  return Probability(0.5 + std::atan(x) / std::numbers::pi);
}

Probability cauchy_sf(double x) noexcept {
  if (x > 1.0) return Probability(std::atan(1.0 / x) / std::numbers::pi);
  return Probability(0.5 - std::atan(x) / std::numbers::pi);
}

// ---------------------------------------------------------------------------
// RngStream

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed),
      stream_id_(stream_id),
      key0_(mix64(seed ^ kGolden)),
      key1_(mix64(stream_id + mix64(seed + 0x632BE59BD9B4E019ULL))) {}

RngStream RngStream::derive(std::uint64_t index) const noexcept {
  return RngStream(seed_, mix64(stream_id_ ^ mix64(index + 0xD1B54A32D192ED03ULL)));
}

RngStream::result_type RngStream::operator()() noexcept {
  const std::uint64_t c = counter_++;
  return mix64(mix64(c * kGolden + key0_) ^ key1_);
}

double RngStream::uniform() noexcept {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<int> rademacher(RngStream& stream, std::size_t n) {
  std::vector<double> signs(n);
  fill_rademacher(stream, signs);
  return std::vector<int>(signs.begin(), signs.end());
}

void fill_rademacher(RngStream& stream, std::span<double> out) noexcept {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t bits = stream();
    const std::size_t take = std::min<std::size_t>(64, out.size() - i);
    for (std::size_t j = 0; j < take; ++j, bits >>= 1) {
      out[i++] = (bits & 1U) ? 1.0 : -1.0;
    }
  }
}

}  // namespace ltest
