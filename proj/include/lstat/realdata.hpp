#pragma once

// Excess-return pipeline: ingest returns and a risk-free series, screen out
// autocorrelated series with Ljung-Box, per-stock t-tests with
// Benjamini-Hochberg discoveries, and a subsample rejection-rate study.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lstat/battery.hpp"
#include "lstat/core.hpp"
#include "lstat/numstat.hpp"

namespace ltest {

struct ReturnsPanel {
  std::vector<std::string> dates;    // ISO dates, ascending
  std::vector<std::string> tickers;
  Matrix returns;                    // T x p raw returns R_ij
  Vector riskfree;                   // T risk-free rates r_i
  std::size_t dropped_rows = 0;      // rows lost to gaps or the date join

  std::size_t T() const noexcept { return dates.size(); }
  std::size_t p() const noexcept { return tickers.size(); }
  /// X_ij = R_ij - r_i.
  Matrix excess() const;
  /// Panel restricted to the given columns, in the given order.
  ReturnsPanel select(const std::vector<std::size_t>& columns) const;
};

inline constexpr std::size_t kMinPeriods = 30;

/// Wide returns CSV (`date,<ticker>...`) inner-joined with a risk-free CSV
/// (`date,rate`) on exact date strings. Rows with any missing cell are dropped
/// and counted in dropped_rows.
ReturnsPanel load_returns(const std::string& returns_path, const std::string& riskfree_path);
ReturnsPanel load_returns(std::istream& returns, std::istream& riskfree);

struct LjungBoxResult {
  double q = 0.0;
  Probability p_value;
};

/// Q = T (T + 2) sum_{k=1}^{lag} rho_k^2 / (T - k), referred to chi^2_lag.
LjungBoxResult ljung_box(std::span<const double> series, std::size_t lag);

inline constexpr std::size_t kDefaultLjungBoxLag = 10;

struct ScreenedTicker {
  std::string ticker;
  double q = 0.0;
  double p_value = 0.0;
  bool kept = true;
};

struct ScreeningResult {
  std::vector<std::string> kept;
  std::vector<std::size_t> kept_columns;
  std::vector<ScreenedTicker> screened;  // every ticker, input order
  std::vector<std::string> dropped;
  std::size_t lag = kDefaultLjungBoxLag;
  double level = 0.05;
};

/// Keeps tickers whose excess-return Ljung-Box p-value exceeds `level`
/// (level <= 0 keeps everything).
ScreeningResult screen_autocorrelation(const ReturnsPanel& panel, std::size_t lag, double level);

/// Benjamini-Hochberg step-up at FDR q: indices (into pvals) of the i* smallest
/// p-values, i* the largest i with p_(i) <= i q / m. Returned in ascending index order.
std::vector<std::size_t> bh_discoveries(std::span<const double> pvals, double q);

struct StockRow {
  std::string ticker;
  double t_stat = 0.0;
  double p_value = 1.0;  // two-sided Student t, T - 1 degrees of freedom
  bool bh_reject = false;
};

std::vector<StockRow> per_stock_table(const ReturnsPanel& panel, double fdr);

struct SubsampleRow {
  std::size_t n = 0;
  std::string test;
  std::size_t rejections = 0;
  std::size_t reps = 0;
  double rate = 0.0;
  double se = 0.0;
};

/// For each n, M subsamples of n distinct rows of the excess returns; each
/// test is run at level alpha on every subsample (one bootstrap pass each).
std::vector<SubsampleRow> subsample_study(const ReturnsPanel& panel,
                                          const std::vector<std::size_t>& n_list,
                                          const std::vector<TestId>& tests, std::size_t M,
                                          std::size_t B, double alpha, const RngStream& stream,
                                          unsigned threads = 0);

/// Look-alike of a weekly large-cap panel: a market factor, a block of
/// autocorrelated series that screening should remove, a few planted
/// nonzero-mean stocks and optionally a weaker dense signal.
struct SyntheticReturnsConfig {
  std::size_t T = 501;
  std::size_t p = 424;
  std::size_t autocorrelated = 130;
  double ar_coef = 0.35;
  std::size_t planted = 17;
  double planted_t = 6.0;   // full-sample t statistic of each planted stock
  std::size_t dense = 0;
  double dense_t = 0.0;
  double idio_vol = 0.035;
  double market_vol = 0.02;
  double riskfree = 0.0002;
};

struct SyntheticReturns {
  ReturnsPanel panel;
  std::vector<std::string> planted;  // tickers given a nonzero mean
};

SyntheticReturns synthetic_returns(const SyntheticReturnsConfig& cfg, const RngStream& stream);

void write_returns_csv(const ReturnsPanel& panel, std::ostream& returns, std::ostream& riskfree);
void write_stock_csv(std::ostream& out, const std::vector<StockRow>& rows);
void write_subsample_csv(std::ostream& out, const std::vector<SubsampleRow>& rows);
void write_screening_csv(std::ostream& out, const ScreeningResult& result);

}  // namespace ltest
