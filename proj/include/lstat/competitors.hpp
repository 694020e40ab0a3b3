#pragma once

// Baseline tests: MAX (T_1), SUM (T_p), COM (Cauchy combination of MAX and
// SUM) and adaQ (Cauchy combination of sum-of-powers statistics L(r),
// r = 2, 4, 6 and the max). All are calibrated from one wild-bootstrap pass.

#include <cstddef>
#include <optional>

#include "lstat/adaptive.hpp"
#include "lstat/bootstrap.hpp"
#include "lstat/core.hpp"

namespace ltest {

/// L(r) = sum_i mean_i^r for a finite even r, or max_i t_i^2 when r is empty
/// (the infinity member of the family).
struct PowerStatistic {
  std::optional<int> r;
  double value = 0.0;
};

PowerStatistic power_statistic(const SampleMatrix& x, std::optional<int> r);

TestReport max_test(const TStatPanel& panel, const BootstrapDistribution& dist, double alpha);
TestReport sum_test(const TStatPanel& panel, const BootstrapDistribution& dist, double alpha);
TestReport com_test(const TStatPanel& panel, const BootstrapDistribution& dist, double alpha);
TestReport adaq_test(const SampleMatrix& x, const TStatPanel& panel,
                     const BootstrapDistribution& dist, double alpha);

TestReport max_test(const SampleMatrix& x, const BootstrapDistribution& dist, double alpha);
TestReport sum_test(const SampleMatrix& x, const BootstrapDistribution& dist, double alpha);
TestReport com_test(const SampleMatrix& x, const BootstrapDistribution& dist, double alpha);

/// adaQ with its own bootstrap pass (grid {1}).
TestReport adaq_test(const SampleMatrix& x, std::size_t B, double alpha, const RngStream& stream,
                     unsigned threads = 1);

}  // namespace ltest
