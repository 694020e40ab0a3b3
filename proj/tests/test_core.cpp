#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "lstat/core.hpp"
#include "lstat/error.hpp"
#include "support.hpp"

using namespace ltest;
using ltest::testing::iid_normal;

namespace {

// Naive t statistics: independent loops, n - 1 divisor.
std::vector<double> naive_t(const Matrix& x) {
  const auto n = static_cast<double>(x.rows());
  std::vector<double> t;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double m = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) m += x(i, j);
    m /= n;
    double ss = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) ss += (x(i, j) - m) * (x(i, j) - m);
    t.push_back(std::sqrt(n) * m / std::sqrt(ss / (n - 1)));
  }
  return t;
}

// Max over all size-k subsets of summed t^2. Each subset is summed largest
// first so the winning subset reproduces the same rounding as a sorted sum.
double subset_max(const std::vector<double>& t, std::size_t k) {
  const std::size_t p = t.size();
  double best = -1.0;
  std::vector<double> chosen;
  for (std::uint32_t mask = 0; mask < (1u << p); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    chosen.clear();
    for (std::size_t i = 0; i < p; ++i)
      if (mask & (1u << i)) chosen.push_back(t[i] * t[i]);
    std::sort(chosen.begin(), chosen.end(), std::greater<>());
    double s = 0;
    for (double v : chosen) s += v;
    best = std::max(best, s);
  }
  return best;
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST(ColumnMoments, HandExamples) {
  EXPECT_THROW(SampleMatrix(column({1, 1, 1, 1})), DataError);
  const auto m = column_moments(column({0, 0, 2, 2}));
  EXPECT_DOUBLE_EQ(m.means(0), 1.0);
  EXPECT_NEAR(m.variances(0), 4.0 / 3.0, 1e-15);
}

TEST(ColumnMoments, DegenerateColumnNamed) {
  Matrix x = iid_normal(10, 3, 1);
  x.col(1).setConstant(2.5);
  try {
    SampleMatrix s(x);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
  }
}

TEST(ColumnMoments, MatchesTwoPassOracle) {
  const Matrix x = iid_normal(50, 10, 2);
  const auto m = column_moments(x);
  for (Eigen::Index j = 0; j < 10; ++j) {
    double mean = 0;
    for (Eigen::Index i = 0; i < 50; ++i) mean += x(i, j);
    mean /= 50;
    double ss = 0;
    for (Eigen::Index i = 0; i < 50; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
    EXPECT_NEAR(m.means(j), mean, 1e-12);
    EXPECT_NEAR(m.variances(j), ss / 49, 1e-12);
  }
}

TEST(SampleMatrix, Validation) {
  EXPECT_THROW(SampleMatrix(iid_normal(3, 5, 1)), DataError);
  EXPECT_THROW(SampleMatrix(Matrix(10, 0)), DataError);
  Matrix x = iid_normal(10, 4, 1);
  x(3, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(SampleMatrix{x}, DataError);
  x(3, 2) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(SampleMatrix{x}, DataError);
  EXPECT_NO_THROW(SampleMatrix(iid_normal(4, 1, 1)));
}

TEST(TStatistics, HandExample) {
  const auto panel = t_statistics(SampleMatrix(column({0, 0, 2, 2})));
  EXPECT_NEAR(panel.t[0], std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(l_statistic(panel, 1), 3.0, 1e-13);
}

TEST(TStatistics, MatchesNaiveAndTelescopes) {
  const Matrix x = iid_normal(30, 25, 3);
  const auto panel = t_statistics(SampleMatrix(x));
  const auto t = naive_t(x);
  double direct = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(panel.t[i], t[i], 1e-12);
    direct += t[i] * t[i];
  }
  EXPECT_NEAR(panel.prefix.back(), direct, 1e-10);
}

TEST(TStatistics, PanelInvariants) {
  const auto panel = t_statistics(SampleMatrix(iid_normal(20, 40, 4)));
  std::vector<double> sq;
  for (double v : panel.t) sq.push_back(v * v);
  std::sort(sq.begin(), sq.end(), std::greater<>());
  EXPECT_EQ(sq, panel.sorted_sq);
  EXPECT_DOUBLE_EQ(panel.prefix[0], panel.sorted_sq[0]);
  for (std::size_t i = 1; i < panel.prefix.size(); ++i) {
    EXPECT_GE(panel.prefix[i], panel.prefix[i - 1]);
  }
}

TEST(TStatistics, SubsetMaximumP8) {
  const Matrix x = iid_normal(12, 8, 5);
  const auto panel = t_statistics(SampleMatrix(x));
  const auto t = naive_t(x);
  for (std::size_t k = 1; k <= 8; ++k) {
    EXPECT_NEAR(l_statistic(panel, k), subset_max(t, k), 1e-10) << k;
  }
}

TEST(TStatistics, SubsetMaximumAllSmallP) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> z;
  for (std::size_t p = 1; p <= 10; ++p) {
    std::vector<double> t(p);
    for (auto& v : t) v = z(gen);
    const auto panel = make_panel(t);
    for (std::size_t k = 1; k <= p; ++k) {
      EXPECT_EQ(l_statistic(panel, k), subset_max(t, k)) << p << " " << k;
    }
  }
}

TEST(LStatistic, Examples) {
  const auto panel = make_panel({-1.0, 0.0, 2.0, 0.0, -3.0, 2.0});  // squares 1,0,4,0,9,4
  EXPECT_DOUBLE_EQ(l_statistic(panel, 3), 17.0);
  EXPECT_DOUBLE_EQ(l_statistic(panel, 1), 9.0);
  EXPECT_DOUBLE_EQ(l_statistic(panel, 6), 18.0);
  EXPECT_THROW(l_statistic(panel, 0), DomainError);
  EXPECT_THROW(l_statistic(panel, 7), DomainError);
}

TEST(TStatistics, ScaleAndSignEquivariance) {
  Matrix x = iid_normal(25, 6, 7);
  const auto base = t_statistics(SampleMatrix(x));
  Matrix scaled = x;
  scaled.col(2) *= 37.5;
  const auto s = t_statistics(SampleMatrix(scaled));
  EXPECT_NEAR(s.t[2], base.t[2], 1e-10);
  Matrix neg = x;
  neg.col(4) *= -1.0;
  const auto n = t_statistics(SampleMatrix(neg));
  EXPECT_NEAR(n.t[4], -base.t[4], 1e-12);
  for (std::size_t k = 1; k <= 6; ++k) {
    EXPECT_NEAR(l_statistic(n, k), l_statistic(base, k), 1e-10);
  }
}

TEST(TStatistics, AllOrdersFastAtLargeP) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> z;
  std::vector<double> t(100000);
  for (auto& v : t) v = z(gen);
  const auto start = std::chrono::steady_clock::now();
  const auto panel = make_panel(t);
  double acc = 0;
  for (std::size_t k = 1; k <= panel.p(); ++k) acc += l_statistic(panel, k);
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             start)
                      .count();
  EXPECT_GT(acc, 0.0);
  EXPECT_LT(ms, 50.0);
}

TEST(KGridTest, DefaultGrid) {
  EXPECT_EQ(default_k_halvings(100), 2u);
  EXPECT_EQ(default_k_grid(100).ks(), (std::vector<std::size_t>{5, 25, 50}));
  EXPECT_EQ(default_k_halvings(200), 3u);
  EXPECT_EQ(default_k_grid(200).ks(), (std::vector<std::size_t>{5, 25, 50, 100}));
  EXPECT_EQ(default_k_halvings(40), 1u);
  EXPECT_EQ(default_k_grid(40).ks(), (std::vector<std::size_t>{5, 20}));
  EXPECT_EQ(default_k_grid(400).ks(), (std::vector<std::size_t>{5, 25, 50, 100, 200}));
  EXPECT_EQ(default_k_grid(79).ks(), (std::vector<std::size_t>{5, 40}));
  EXPECT_EQ(default_k_grid(80).ks(), (std::vector<std::size_t>{5, 20, 40}));
  EXPECT_THROW(default_k_grid(39), DomainError);
}

TEST(KGridTest, Validation) {
  EXPECT_THROW(KGrid({3, 2}, 10), DomainError);
  EXPECT_THROW(KGrid({0, 2}, 10), DomainError);
  EXPECT_THROW(KGrid({2, 11}, 10), DomainError);
  const auto g = make_k_grid({7, 2, 7, 5}, 10);
  EXPECT_EQ(g.ks(), (std::vector<std::size_t>{2, 5, 7}));
  EXPECT_TRUE(g.contains(5));
  EXPECT_EQ(g.index_of(7), 2u);
  EXPECT_FALSE(g.index_of(3).has_value());
  EXPECT_EQ(g.with({1, 5, 10}).ks(), (std::vector<std::size_t>{1, 2, 5, 7, 10}));
}
