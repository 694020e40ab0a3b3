#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "lstat/error.hpp"
#include "lstat/realdata.hpp"
#include "support.hpp"

using namespace ltest;

namespace {

// ISO label of day t counted from 2000-01-01.
std::string day(std::size_t t) {
  using namespace std::chrono;
  const year_month_day d{sys_days{year{2000} / January / 1} + days{static_cast<int>(t)}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::string dates_csv(std::size_t T, std::size_t p, std::uint64_t seed, double ar = 0.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 0.02);
  std::ostringstream out;
  out << "date";
  for (std::size_t j = 0; j < p; ++j) out << ",A" << j;
  out << '\n';
  std::vector<double> prev(p, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    out << day(t);
    for (std::size_t j = 0; j < p; ++j) {
      prev[j] = ar * prev[j] + z(gen);
      out << ',' << prev[j];
    }
    out << '\n';
  }
  return out.str();
}

std::string rf_csv(std::size_t T, std::size_t offset = 0) {
  std::ostringstream out;
  out << "date,rate\n";
  for (std::size_t t = 0; t < T; ++t) out << day(t + offset) << ",0.0001\n";
  return out.str();
}

ReturnsPanel panel_from(const std::string& r, const std::string& f) {
  std::istringstream a(r), b(f);
  return load_returns(a, b);
}

}  // namespace

TEST(LoadReturns, ToyPanel) {
  // 30 rows minimum; the toy shape check uses the stream loader directly
  const auto panel = panel_from(dates_csv(30, 2, 1), rf_csv(30));
  EXPECT_EQ(panel.T(), 30u);
  EXPECT_EQ(panel.p(), 2u);
  EXPECT_EQ(panel.dropped_rows, 0u);
  EXPECT_NEAR(panel.excess()(0, 0), panel.returns(0, 0) - 0.0001, 1e-15);
}

TEST(LoadReturns, SmallInputsRejected) {
  std::istringstream r("date,A,B\n2020-01-03,0.01,0.02\n2020-01-10,0.0,0.01\n2020-01-17,0.02,-0.01\n");
  std::istringstream f("date,rate\n2020-01-03,0.0\n2020-01-10,0.0\n2020-01-17,0.0\n");
  EXPECT_THROW(load_returns(r, f), DataError);  // T = 3 < 30
}

TEST(LoadReturns, InnerJoinDropsMissingDates) {
  std::string rf = rf_csv(40);
  const auto pos = rf.find(day(7));
  rf.erase(pos, rf.find('\n', pos) - pos + 1);
  auto r = dates_csv(40, 3, 2);
  // a gap in the returns too
  const auto gap = r.find(day(20) + ",");
  const auto comma = r.find(',', gap);
  const auto next = r.find(',', comma + 1);
  r.replace(comma + 1, next - comma - 1, "NA");
  const auto panel = panel_from(r, rf);
  EXPECT_EQ(panel.T(), 38u);
  EXPECT_EQ(panel.dropped_rows, 2u);
  EXPECT_TRUE(std::is_sorted(panel.dates.begin(), panel.dates.end()));
}

TEST(LoadReturns, Errors) {
  EXPECT_THROW(panel_from("date,A\n", rf_csv(40)), DataError);
  std::string bad = dates_csv(40, 2, 3);
  bad.replace(bad.find(day(5) + ",") + 11, 3, "xyz");
  try {
    panel_from(bad, rf_csv(40));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 7u);
  }
  std::string dup = dates_csv(40, 2, 3);
  dup.replace(dup.find(day(9)), 10, day(8));
  EXPECT_THROW(panel_from(dup, rf_csv(40)), DataError);
  const std::string other = rf_csv(40, 5000);
  EXPECT_THROW(panel_from(dates_csv(40, 2, 3), other), DataError);
  EXPECT_THROW(panel_from(dates_csv(40, 2, 3), "day,rate\n"), DataError);
  EXPECT_THROW(load_returns("/nonexistent/r.csv", "/nonexistent/f.csv"), DataError);
}

TEST(LjungBox, NullUniform) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  std::vector<double> pv;
  for (int r = 0; r < 1000; ++r) {
    std::vector<double> x(500);
    for (auto& v : x) v = z(gen);
    pv.push_back(ljung_box(x, 10).p_value.value());
  }
  EXPECT_LT(ltest::testing::ks_uniform(pv), 0.05);
}

TEST(LjungBox, DetectsStrongAr) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z;
  int hits = 0;
  for (int r = 0; r < 500; ++r) {
    std::vector<double> x(500);
    double prev = 0;
    for (auto& v : x) v = prev = 0.8 * prev + z(gen);
    hits += ljung_box(x, 10).p_value.value() < 0.001;
  }
  EXPECT_GE(hits, 495);
}

TEST(LjungBox, HandValueAndErrors) {
  const std::vector<double> x{1, -1, 1, -1, 1, -1, 1, -1};
  // rho_1 = -7/8 for an alternating series; Q with lag 1 = T(T+2) rho^2 / (T-1)
  const double rho1 = -7.0 / 8.0;
  EXPECT_NEAR(ljung_box(x, 1).q, 8.0 * 10.0 * rho1 * rho1 / 7.0, 1e-12);
  EXPECT_THROW(ljung_box(std::vector<double>(50, 2.0), 5), DataError);
  EXPECT_THROW(ljung_box(x, 4), DomainError);
  EXPECT_THROW(ljung_box(x, 0), DomainError);
}

TEST(Screening, IidAndArPanels) {
  const auto iid = panel_from(dates_csv(500, 1000, 6), rf_csv(500));
  const auto res = screen_autocorrelation(iid, 10, 0.05);
  EXPECT_NEAR(res.kept.size() / 1000.0, 0.95, 0.03);
  EXPECT_EQ(res.kept.size() + res.dropped.size(), 1000u);
  std::set<std::string> all(res.kept.begin(), res.kept.end());
  for (const auto& d : res.dropped) EXPECT_TRUE(all.insert(d).second);
  EXPECT_EQ(all.size(), 1000u);

  const auto ar = panel_from(dates_csv(500, 200, 7, 0.8), rf_csv(500));
  EXPECT_LE(screen_autocorrelation(ar, 10, 0.05).kept.size(), 2u);

  EXPECT_EQ(screen_autocorrelation(ar, 10, 0.0).kept.size(), 200u);
  const auto strict = screen_autocorrelation(iid, 10, 1.0);
  for (const auto& t : strict.screened) EXPECT_EQ(t.kept, t.p_value >= 1.0);
}

TEST(Bh, Examples) {
  const std::vector<double> ones(10, 1.0);
  EXPECT_TRUE(bh_discoveries(ones, 0.05).empty());
  const std::vector<double> p{0.001, 0.008, 0.039, 0.9};
  EXPECT_EQ(bh_discoveries(p, 0.05), (std::vector<std::size_t>{0, 1}));
  const std::vector<double> shuffled{0.9, 0.039, 0.001, 0.008};
  EXPECT_EQ(bh_discoveries(shuffled, 0.05), (std::vector<std::size_t>{2, 3}));
  EXPECT_THROW(bh_discoveries(p, 0.0), DomainError);
  EXPECT_THROW(bh_discoveries(p, 1.0), DomainError);
}

TEST(Bh, ControlsFdrUnderNull) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double fdp = 0;
  const int sims = 10000;
  for (int r = 0; r < sims; ++r) {
    std::vector<double> p(280);
    for (auto& v : p) v = u(gen);
    fdp += bh_discoveries(p, 0.01).empty() ? 0.0 : 1.0;  // every discovery is false
  }
  EXPECT_LE(fdp / sims, 0.012);
}

TEST(Bh, Monotone) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  for (int r = 0; r < 200; ++r) {
    std::vector<double> p(20);
    for (auto& v : p) v = u(gen);
    const auto base = bh_discoveries(p, 0.1);
    // lowering a p-value never removes a discovery
    auto lower = p;
    lower[r % 20] *= 0.5;
    const auto l = bh_discoveries(lower, 0.1);
    for (auto i : base) EXPECT_NE(std::find(l.begin(), l.end(), i), l.end());
    // an appended p-value of 1 is never rejected and acts as a level m / (m + 1) shrink
    auto more = p;
    more.push_back(1.0);
    EXPECT_EQ(bh_discoveries(more, 0.1), bh_discoveries(p, 0.1 * 20.0 / 21.0));
  }
  // so it can remove discoveries: one p-value at the level
  const std::vector<double> single{0.05}, padded{0.05, 1.0};
  EXPECT_EQ(bh_discoveries(single, 0.05).size(), 1u);
  EXPECT_TRUE(bh_discoveries(padded, 0.05).empty());
}

TEST(PerStock, StudentReference) {
  const auto panel = panel_from(dates_csv(60, 5, 10), rf_csv(60));
  const auto rows = per_stock_table(panel, 0.1);
  const Matrix x = panel.excess();
  for (std::size_t j = 0; j < 5; ++j) {
    const auto col = x.col(static_cast<Eigen::Index>(j));
    const double m = col.mean();
    const double sd = std::sqrt((col.array() - m).square().sum() / 59.0);
    const double t = std::sqrt(60.0) * m / sd;
    const double nu = 59.0;
    EXPECT_NEAR(rows[j].t_stat, t, 1e-10);
    EXPECT_NEAR(rows[j].p_value, boost::math::ibeta(nu / 2, 0.5, nu / (nu + t * t)), 1e-12);
    EXPECT_EQ(rows[j].ticker, panel.tickers[j]);
  }
}

TEST(Subsample, FullSampleSingleDecision) {
  const auto panel = panel_from(dates_csv(60, 50, 11), rf_csv(60));
  const auto tests = parse_test_list("T5,SUM");
  const auto rows = subsample_study(panel, {60}, tests, 1, 100, 0.05, RngStream(1));
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.reps, 1u);
    EXPECT_TRUE(r.rate == 0.0 || r.rate == 1.0);
  }
  const auto again = subsample_study(panel, {60}, tests, 1, 100, 0.05, RngStream(1));
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].rejections, again[i].rejections);
  EXPECT_THROW(subsample_study(panel, {61}, tests, 1, 100, 0.05, RngStream(1)), DomainError);
}

TEST(Subsample, NullPanelRatesNearLevel) {
  SyntheticReturnsConfig cfg;
  cfg.T = 300;
  cfg.p = 100;
  cfg.autocorrelated = 0;
  cfg.planted = 0;
  const auto synth = synthetic_returns(cfg, RngStream(12));
  const auto rows = subsample_study(synth.panel, {100}, parse_test_list("T5,Tp/8,SUM,TC"), 400,
                                    200, 0.05, RngStream(13));
  for (const auto& r : rows) {
    EXPECT_NEAR(r.rate, 0.05, 0.04) << r.test;
    EXPECT_NEAR(r.se, std::sqrt(r.rate * (1 - r.rate) / 400), 1e-12);
  }
}

TEST(Subsample, DenseSignalOrdering) {
  SyntheticReturnsConfig cfg;
  cfg.T = 300;
  cfg.p = 280;
  cfg.autocorrelated = 0;
  cfg.planted = 0;
  cfg.dense = 35;
  cfg.dense_t = 3.0;
  const auto synth = synthetic_returns(cfg, RngStream(14));
  const auto rows = subsample_study(synth.panel, {150}, parse_test_list("Tp/8,TC,COM"), 200,
                                    200, 0.05, RngStream(15));
  EXPECT_GE(rows[0].rate + 0.05, rows[1].rate);
  EXPECT_GE(rows[1].rate + 0.05, rows[2].rate);
}

TEST(Synthetic, ShapeAndRoundTrip) {
  const auto synth = synthetic_returns(SyntheticReturnsConfig{}, RngStream(16));
  EXPECT_EQ(synth.panel.T(), 501u);
  EXPECT_EQ(synth.panel.p(), 424u);
  EXPECT_EQ(synth.planted.size(), 17u);
  std::stringstream r, f;
  write_returns_csv(synth.panel, r, f);
  const auto back = load_returns(r, f);
  EXPECT_EQ(back.T(), 501u);
  EXPECT_EQ(back.p(), 424u);
  EXPECT_EQ(back.tickers, synth.panel.tickers);
  EXPECT_LT((back.returns - synth.panel.returns).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Synthetic, Deterministic) {
  SyntheticReturnsConfig cfg;
  cfg.T = 100;
  cfg.p = 40;
  cfg.autocorrelated = 5;
  cfg.planted = 3;
  const auto a = synthetic_returns(cfg, RngStream(17));
  const auto b = synthetic_returns(cfg, RngStream(17));
  EXPECT_TRUE(a.panel.returns == b.panel.returns);
  EXPECT_EQ(a.planted, b.planted);
}
