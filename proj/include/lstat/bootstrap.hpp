#pragma once

// Wild (Rademacher sign-flip) bootstrap of the full L-statistic panel and
// the two p-value rules built on it.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "lstat/core.hpp"
#include "lstat/numstat.hpp"

namespace ltest {

inline constexpr std::size_t kDefaultBootstrapReps = 500;

/// Even power orders r whose bootstrap laws of sum_i mean_i^r are recorded
/// alongside the L-statistics (used by the sum-of-powers competitor).
inline constexpr std::array<int, 3> kPowerSumOrders{2, 4, 6};

class BootstrapDistribution {
 public:
  BootstrapDistribution(KGrid grid, Matrix replicates, Matrix power_sums, std::uint64_t seed);

  std::size_t B() const noexcept { return static_cast<std::size_t>(replicates_.rows()); }
  const KGrid& grid() const noexcept { return grid_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// B x |grid|; column j holds T*_{grid[j], b}.
  const Matrix& replicates() const noexcept { return replicates_; }
  /// B x |kPowerSumOrders|; column r holds sum_i (mean*_i)^{kPowerSumOrders[r]}.
  const Matrix& power_sums() const noexcept { return power_sums_; }

  /// Replicates of T*_k; throws DomainError when k is not in the grid.
  std::span<const double> column(std::size_t k) const;
  const Vector& per_k_mean() const noexcept { return mean_; }
  const Vector& per_k_var() const noexcept { return var_; }
  double mean(std::size_t k) const;
  double variance(std::size_t k) const;

 private:
  std::size_t slot(std::size_t k) const;

  KGrid grid_;
  Matrix replicates_;
  Matrix power_sums_;
  Vector mean_;
  Vector var_;
  std::uint64_t seed_;
};

/// B wild-bootstrap replicates of T_k for every k in `grid`. Rows are centered
/// by the sample mean; replicate b multiplies row i by a Rademacher sign drawn
/// from stream.derive(b) and recomputes every t statistic, variances included.
/// Replicates are spread over `threads` workers (0 = all cores); the output
/// does not depend on the worker count.
BootstrapDistribution wild_bootstrap(const SampleMatrix& x, const KGrid& grid, std::size_t B,
                                     const RngStream& stream, unsigned threads = 1);

/// Right-tailed empirical p-value with the +1 correction:
/// (1 + #{replicate >= observed}) / (B + 1).
Probability p_value_empirical(double observed, std::span<const double> replicates);

/// Empirical rule applied to T*_k.
Probability p_value_fixed_k(double observed, const BootstrapDistribution& dist, std::size_t k);

/// Normal rule: 1 - Phi((observed - mean*_k) / sd*_k).
Probability p_value_diverging_k(double observed, const BootstrapDistribution& dist, std::size_t k);

}  // namespace ltest
