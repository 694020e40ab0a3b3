#pragma once

// Monte-Carlo size and size-corrected power studies over simulated designs.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>


#include "lstat/battery.hpp"
#include "lstat/simgen.hpp"

namespace ltest {

struct StudyOptions {
  std::size_t B = kDefaultBootstrapReps;
  unsigned threads = 0;  // 0 = all cores
};

/// M x |tests| matrix of p-values from M independent datasets drawn from `cfg`.
/// Replicate m uses stream.derive(m) for both the data and the bootstrap, so
/// the result is a pure function of (cfg, tests, M, B, stream).
Matrix simulate_pvalues(const SimConfig& cfg, const std::vector<TestId>& tests, std::size_t M,
                        const RngStream& stream, const StudyOptions& options = {});

/// One output cell: rejection frequency of one test at one sparsity level.
struct RateRow {
  std::size_t n = 0;
  std::size_t p = 0;
  Innovation innovation = Innovation::Normal;
  double rho = 0.0;
  std::string test;
  std::size_t s = 0;
  double kappa = 0.0;
  std::size_t rejections = 0;
  std::size_t reps = 0;
  double rate = 0.0;
  double se = 0.0;
  bool corrected = false;
};

/// Null rejection rates at level alpha. se = sqrt(alpha (1 - alpha) / M).
std::vector<RateRow> run_size_study(const SimConfig& null_template,
                                    const std::vector<TestId>& tests, std::size_t M, double alpha,
                                    const RngStream& stream, const StudyOptions& options = {});

/// Per-test p-value threshold equal to the empirical alpha-quantile of the
/// test's null p-values: the largest observed p-value c whose empirical CDF
/// F(c) is at most alpha (0 when even the smallest p-value exceeds that).
std::vector<double> empirical_critical_values(const SimConfig& null_template,
                                              const std::vector<TestId>& tests, std::size_t M0,
                                              double alpha, const RngStream& stream,
                                              const StudyOptions& options = {});

/// Threshold from a column of null p-values (see empirical_critical_values).
double pvalue_threshold(std::vector<double> null_pvalues, double alpha);

struct PowerCurve {
  SimConfig scenario;
  std::vector<std::string> tests;
  std::vector<std::size_t> sparsity_grid;
  Matrix estimates;  // |tests| x |grid|
  std::size_t mc_reps = 0;
  bool corrected = true;
  std::vector<RateRow> rows;

  double power(const std::string& test, std::size_t s) const;
};

/// For each s in the grid, M datasets with mu = make_mu(s) (kappa from the
/// template when set, otherwise the default for that s); test t rejects when
/// its p-value is at most thresholds[t].
PowerCurve run_power_sweep(const SimConfig& scenario_template, const std::vector<TestId>& tests,
                           const std::vector<std::size_t>& sparsity_grid, std::size_t M,
                           const std::vector<double>& thresholds, const RngStream& stream,
                           const StudyOptions& options = {});

/// CSV with columns n,p,innovation,rho,test,s,kappa,rejections,reps,rate,se,corrected.
void write_rate_csv(std::ostream& out, const std::vector<RateRow>& rows);

/// Parses a sparsity grid: "0", "1,2,5,10" or "start:stop:step" (inclusive stop).
std::vector<std::size_t> parse_sparsity_grid(const std::string& spec);

}  // namespace ltest
