#include <gtest/gtest.h>

#include "lstat/battery.hpp"
#include "lstat/competitors.hpp"
#include "lstat/error.hpp"
#include "support.hpp"

using namespace ltest;

TEST(TestIdParse, Tokens) {
  EXPECT_EQ(TestId::parse("TC").kind(), TestKind::Adaptive);
  EXPECT_EQ(TestId::parse("T_C").label(), "TC");
  EXPECT_EQ(TestId::parse("MAX").kind(), TestKind::Max);
  EXPECT_EQ(TestId::parse("SUM").kind(), TestKind::Sum);
  EXPECT_EQ(TestId::parse("COM").kind(), TestKind::Com);
  EXPECT_EQ(TestId::parse("adaQ").kind(), TestKind::AdaQ);
  EXPECT_EQ(TestId::parse("ADAQ").label(), "adaQ");
  EXPECT_EQ(TestId::parse("T5").label(), "T5");
  EXPECT_EQ(TestId::parse("T_5").label(), "T5");
  EXPECT_EQ(TestId::parse("T0.25p").label(), "T0.25p");
  EXPECT_EQ(TestId::parse("Tp/8").label(), "Tp/8");
  EXPECT_EQ(TestId::parse("Tp").label(), "Tp");
  for (const char* bad : {"", "T", "T0", "Tp/0", "T1.5p", "FOO", "T-3", "Tp/x"}) {
    EXPECT_THROW(TestId::parse(bad), DomainError) << bad;
  }
}

TEST(TestIdParse, Orders) {
  EXPECT_EQ(TestId::parse("T0.25p").order(100), 25u);
  EXPECT_EQ(TestId::parse("T0.25p").order(101), 26u);
  EXPECT_EQ(TestId::parse("T0.5p").order(400), 200u);
  EXPECT_EQ(TestId::parse("Tp/8").order(280), 35u);
  EXPECT_EQ(TestId::parse("Tp/8").order(281), 36u);
  EXPECT_EQ(TestId::parse("Tp").order(37), 37u);
  EXPECT_EQ(TestId::parse("T5").order(100), 5u);
  EXPECT_THROW(TestId::parse("T5").order(4), DomainError);
}

TEST(TestIdParse, GridUnion) {
  const auto tests = parse_test_list("T5,SUM,MAX,COM,adaQ,TC");
  EXPECT_EQ(tests.size(), 6u);
  EXPECT_EQ(battery_grid(tests, 100).ks(), (std::vector<std::size_t>{1, 5, 25, 50, 100}));
  EXPECT_EQ(battery_grid(parse_test_list("TC"), 60, {3, 7}).ks(),
            (std::vector<std::size_t>{3, 7}));
  EXPECT_THROW(parse_test_list("T5,,SUM"), DomainError);
}

TEST(Battery, SharedPassMatchesSeparateTests) {
  const SampleMatrix x(ltest::testing::iid_normal(60, 100, 9));
  const auto tests = parse_test_list("T5,SUM,MAX,COM,adaQ,TC,T0.5p");
  const RngStream s(21);
  const auto reports = run_battery(x, tests, 300, 0.05, s);
  ASSERT_EQ(reports.size(), tests.size());

  const auto panel = t_statistics(x);
  const auto dist = wild_bootstrap(x, battery_grid(tests, 100), 300, s);
  EXPECT_DOUBLE_EQ(reports[0].p_value.value(),
                   l_test(panel, dist, 5, Calibration::Empirical, 0.05).p_value.value());
  EXPECT_DOUBLE_EQ(reports[1].p_value.value(), sum_test(panel, dist, 0.05).p_value.value());
  EXPECT_DOUBLE_EQ(reports[2].p_value.value(), max_test(panel, dist, 0.05).p_value.value());
  EXPECT_DOUBLE_EQ(reports[3].p_value.value(), com_test(panel, dist, 0.05).p_value.value());
  EXPECT_DOUBLE_EQ(reports[4].p_value.value(),
                   adaq_test(x, panel, dist, 0.05).p_value.value());
  EXPECT_DOUBLE_EQ(reports[5].p_value.value(), adaptive_l_test(panel, dist, 0.05).p_value.value());
  EXPECT_DOUBLE_EQ(reports[6].p_value.value(),
                   l_test(panel, dist, 50, Calibration::Normal, 0.05).p_value.value());
  // each test alone sees the same replicates for its orders
  const auto alone = run_battery(x, {tests[5]}, 300, 0.05, s);
  EXPECT_DOUBLE_EQ(alone[0].p_value.value(), reports[5].p_value.value());
}

TEST(Battery, CustomAdaptiveGridAllowsSmallP) {
  const SampleMatrix x(ltest::testing::iid_normal(30, 12, 4));
  EXPECT_THROW(run_battery(x, parse_test_list("TC"), 100, 0.05, RngStream(1)), DomainError);
  const auto r = run_battery(x, parse_test_list("TC"), 100, 0.05, RngStream(1), 1, {2, 6});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_GT(r[0].p_value.value(), 0.0);
}
