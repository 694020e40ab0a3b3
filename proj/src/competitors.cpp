#include "lstat/competitors.hpp"

#include <array>
#include <cmath>
#include <string>

#include "lstat/error.hpp"

namespace ltest {

namespace {

void require_in_grid(const BootstrapDistribution& dist, std::size_t k, const char* test) {
  if (!dist.grid().contains(k)) {
    throw DomainError(std::string(test) + " needs k = " + std::to_string(k) +
                      " in the bootstrap grid");
  }
}

std::vector<std::pair<std::string, std::string>> base_meta(const BootstrapDistribution& dist,
                                                           std::string calibration) {
  return {{"calibration", std::move(calibration)},
          {"B", std::to_string(dist.B())},
          {"seed", std::to_string(dist.seed())}};
}

}  // namespace

PowerStatistic power_statistic(const SampleMatrix& x, std::optional<int> r) {
  if (!r) return {std::nullopt, l_statistic(t_statistics(x), 1)};
  if (*r < 2 || *r % 2 != 0) throw DomainError("power statistic order must be even and >= 2");
  return {r, x.moments().means.array().pow(*r).sum()};
}

TestReport max_test(const TStatPanel& panel, const BootstrapDistribution& dist, double alpha) {
  require_in_grid(dist, 1, "MAX");
  const double stat = l_statistic(panel, 1);
  return make_report("MAX", stat, p_value_fixed_k(stat, dist, 1), alpha,
                     base_meta(dist, "empirical"));
}

TestReport sum_test(const TStatPanel& panel, const BootstrapDistribution& dist, double alpha) {
  const std::size_t p = panel.p();
  require_in_grid(dist, p, "SUM");
  const double stat = l_statistic(panel, p);
  return make_report("SUM", stat, p_value_diverging_k(stat, dist, p), alpha,
                     base_meta(dist, "normal"));
}

TestReport com_test(const TStatPanel& panel, const BootstrapDistribution& dist, double alpha) {
  const std::size_t p = panel.p();
  require_in_grid(dist, 1, "COM");
  require_in_grid(dist, p, "COM");
  const std::size_t B = dist.B();
  const std::array<double, 2> pvals{
      clamp_pvalue(p_value_fixed_k(l_statistic(panel, 1), dist, 1), B),
      clamp_pvalue(p_value_diverging_k(l_statistic(panel, p), dist, p), B)};
  const auto c = cauchy_combine(pvals);
  return make_report("COM", c.statistic, c.p_value, alpha, base_meta(dist, "cauchy"));
}

TestReport adaq_test(const SampleMatrix& x, const TStatPanel& panel,
                     const BootstrapDistribution& dist, double alpha) {
  require_in_grid(dist, 1, "adaQ");
  const std::size_t B = dist.B();
  std::array<double, kPowerSumOrders.size() + 1> pvals{};
  for (std::size_t j = 0; j < kPowerSumOrders.size(); ++j) {
    const double observed = power_statistic(x, kPowerSumOrders[j]).value;
    const auto col = dist.power_sums().col(static_cast<Eigen::Index>(j));
    pvals[j] = clamp_pvalue(p_value_empirical(observed, {col.data(), B}), B);
  }
  pvals.back() = clamp_pvalue(p_value_fixed_k(l_statistic(panel, 1), dist, 1), B);
  const auto c = cauchy_combine(pvals);
  return make_report("adaQ", c.statistic, c.p_value, alpha, base_meta(dist, "cauchy"));
}

TestReport max_test(const SampleMatrix& x, const BootstrapDistribution& dist, double alpha) {
  return max_test(t_statistics(x), dist, alpha);
}

TestReport sum_test(const SampleMatrix& x, const BootstrapDistribution& dist, double alpha) {
  return sum_test(t_statistics(x), dist, alpha);
}

TestReport com_test(const SampleMatrix& x, const BootstrapDistribution& dist, double alpha) {
  return com_test(t_statistics(x), dist, alpha);
}

TestReport adaq_test(const SampleMatrix& x, std::size_t B, double alpha, const RngStream& stream,
                     unsigned threads) {
  const auto dist = wild_bootstrap(x, make_k_grid({1}, x.p()), B, stream, threads);
  return adaq_test(x, t_statistics(x), dist, alpha);
}

}  // namespace ltest
