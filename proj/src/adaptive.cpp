#include "lstat/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "lstat/error.hpp"

namespace ltest {

TestReport make_report(std::string name, double statistic, Probability p_value, double alpha,
                       std::vector<std::pair<std::string, std::string>> meta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  TestReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.p_value = p_value;
  r.alpha = alpha;
  r.reject = p_value.value() <= alpha;
  r.meta = std::move(meta);
  return r;
}

CauchyCombination cauchy_combine(std::span<const double> pvals, std::span<const double> weights) {
  if (pvals.empty()) throw DomainError("cauchy_combine: no p-values");
  if (pvals.size() != weights.size()) {
    throw DomainError("cauchy_combine: " + std::to_string(pvals.size()) + " p-values but " +
                      std::to_string(weights.size()) + " weights");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("cauchy_combine: weights must be non-negative");
    wsum += w;
  }
  if (std::fabs(wsum - 1.0) > 1e-9) throw DomainError("cauchy_combine: weights must sum to 1");

  double stat = 0.0;
  for (std::size_t j = 0; j < pvals.size(); ++j) {
    if (!(pvals[j] > 0.0 && pvals[j] < 1.0)) {
      throw DomainError("cauchy_combine: p-value " + std::to_string(pvals[j]) +
                        " is not inside (0,1)");
    }
    stat += weights[j] * std::tan((0.5 - pvals[j]) * std::numbers::pi);
  }
  return {stat, cauchy_sf(stat)};
}

CauchyCombination cauchy_combine(std::span<const double> pvals) {
  const std::vector<double> w(pvals.size(), 1.0 / static_cast<double>(pvals.size()));
  return cauchy_combine(pvals, w);
}

double clamp_pvalue(double p, std::size_t B) noexcept {
  const double lo = 1.0 / static_cast<double>(B + 1);
  return std::clamp(p, lo, 1.0 - lo);
}

Calibration default_calibration(std::size_t k) noexcept {
  return k >= kNormalCalibrationMinK ? Calibration::Normal : Calibration::Empirical;
}

Probability l_test_pvalue(const TStatPanel& panel, const BootstrapDistribution& dist,
                          std::size_t k, Calibration calibration) {
  const double observed = l_statistic(panel, k);
  return calibration == Calibration::Empirical ? p_value_fixed_k(observed, dist, k)
                                               : p_value_diverging_k(observed, dist, k);
}

namespace {

const char* calibration_name(Calibration c) {
  return c == Calibration::Empirical ? "empirical" : "normal";
}

}  // namespace

TestReport l_test(const TStatPanel& panel, const BootstrapDistribution& dist, std::size_t k,
                  Calibration calibration, double alpha) {
  const Probability p = l_test_pvalue(panel, dist, k, calibration);
  return make_report(fmt::format("T_{}", k), l_statistic(panel, k), p, alpha,
                     {{"k", std::to_string(k)},
                      {"calibration", calibration_name(calibration)},
                      {"B", std::to_string(dist.B())},
                      {"seed", std::to_string(dist.seed())}});
}

TestReport adaptive_l_test(const TStatPanel& panel, const BootstrapDistribution& dist,
                           double alpha) {
  return adaptive_l_test(panel, dist, default_k_grid(panel.p()), alpha);
}

TestReport adaptive_l_test(const TStatPanel& panel, const BootstrapDistribution& dist,
                           const KGrid& orders, double alpha) {
  const std::size_t B = dist.B();
  // With the default grid: T_5 by the empirical rule, every halving order
  // (all >= 20) by the normal rule.
  std::vector<double> pvals;
  pvals.reserve(orders.size());
  for (std::size_t k : orders.ks()) {
    pvals.push_back(clamp_pvalue(l_test_pvalue(panel, dist, k, default_calibration(k)), B));
  }
  const auto combined = cauchy_combine(pvals);
  return make_report("T_C", combined.statistic, combined.p_value, alpha,
                     {{"grid", fmt::format("{}", fmt::join(orders.ks(), ","))},
                      {"calibration", "cauchy"},
                      {"B", std::to_string(B)},
                      {"seed", std::to_string(dist.seed())}});
}

TestReport adaptive_l_test(const SampleMatrix& x, std::size_t B, double alpha,
                           const RngStream& stream, unsigned threads) {
  const KGrid grid = default_k_grid(x.p());
  const auto dist = wild_bootstrap(x, grid, B, stream, threads);
  return adaptive_l_test(t_statistics(x), dist, alpha);
}

}  // namespace ltest
