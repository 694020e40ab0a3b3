#pragma once

// Special functions and the deterministic random-number streams shared by
// every other part of the library.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace ltest {

/// A value in [0, 1]. Construction from anything else throws DomainError.
class Probability {
 public:
  constexpr Probability() noexcept = default;
  explicit Probability(double value);

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

double norm_pdf(double x) noexcept;
Probability norm_cdf(double x) noexcept;
/// Upper tail 1 - Phi(x), accurate far into the tail.
Probability norm_sf(double x) noexcept;

/// Lower-tail inverse of the standard normal CDF. Acklam's rational
/// approximation followed by one Halley step against norm_cdf.
double norm_quantile(double q);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

Probability chisq_cdf(double x, unsigned df);
Probability chisq_sf(double x, unsigned df);

Probability cauchy_cdf(double x) noexcept;
/// 1 - cauchy_cdf(x) without cancellation for large x.
Probability cauchy_sf(double x) noexcept;

/// Counter-based random stream. The n-th draw is a pure function of
/// (seed, stream_id, n), so a stream can be re-created anywhere and derived
/// child streams never depend on scheduling.
///
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept;

  /// Child stream for sub-task `index`. Pure: does not advance this stream.
  RngStream derive(std::uint64_t index) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  result_type operator()() noexcept;
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key0_;
  std::uint64_t key1_;
  std::uint64_t counter_ = 0;
};

std::vector<int> rademacher(RngStream& stream, std::size_t n);
/// Fills `out` with +/-1.0 signs, 64 signs per generator draw.
void fill_rademacher(RngStream& stream, std::span<double> out) noexcept;

}  // namespace ltest
