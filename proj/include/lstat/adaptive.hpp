#pragma once

// Cauchy combination of p-values and the adaptive L-statistic test T_C,
// which combines T_5 with T_ceil(p / 2^i), i = 1..K.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lstat/bootstrap.hpp"
#include "lstat/core.hpp"
#include "lstat/numstat.hpp"

namespace ltest {

struct TestReport {
  std::string name;
  double statistic = 0.0;
  Probability p_value;
  double alpha = 0.05;
  bool reject = false;
  std::vector<std::pair<std::string, std::string>> meta;
};

TestReport make_report(std::string name, double statistic, Probability p_value, double alpha,
                       std::vector<std::pair<std::string, std::string>> meta = {});

struct CauchyCombination {
  double statistic = 0.0;
  Probability p_value;
};

/// statistic = sum_j w_j tan((1/2 - p_j) pi), p = 1 - G(statistic) with G
/// the standard Cauchy CDF. Weights must be non-negative and sum to one;
/// every p_j must lie strictly inside (0, 1).
CauchyCombination cauchy_combine(std::span<const double> pvals, std::span<const double> weights);

/// Equal-weight combination.
CauchyCombination cauchy_combine(std::span<const double> pvals);

/// Clamps a bootstrap-calibrated p-value into [1/(B+1), 1 - 1/(B+1)].
double clamp_pvalue(double p, std::size_t B) noexcept;

/// How a single T_k is turned into a p-value.
enum class Calibration { Empirical, Normal };

/// Orders at or above this use the normal rule by default.
inline constexpr std::size_t kNormalCalibrationMinK = 20;

Calibration default_calibration(std::size_t k) noexcept;

Probability l_test_pvalue(const TStatPanel& panel, const BootstrapDistribution& dist,
                          std::size_t k, Calibration calibration);

/// Single-order test of T_k.
TestReport l_test(const TStatPanel& panel, const BootstrapDistribution& dist, std::size_t k,
                  Calibration calibration, double alpha);

/// T_C on a precomputed panel and bootstrap pass. The bootstrap grid must
/// contain default_k_grid(p).
TestReport adaptive_l_test(const TStatPanel& panel, const BootstrapDistribution& dist,
                           double alpha);

/// Equal-weight Cauchy combination over an explicit set of orders, each
/// calibrated by default_calibration(k). Used when p is too small for the
/// default grid or a caller wants a different grid.
TestReport adaptive_l_test(const TStatPanel& panel, const BootstrapDistribution& dist,
                           const KGrid& orders, double alpha);

/// T_C with its own bootstrap pass over default_k_grid(p). Requires p >= 40.
TestReport adaptive_l_test(const SampleMatrix& x, std::size_t B, double alpha,
                           const RngStream& stream, unsigned threads = 1);

}  // namespace ltest
