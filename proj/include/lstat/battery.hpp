#pragma once

// Named tests run together on one dataset with a single shared bootstrap pass.
//
// Test tokens:
//   TC          adaptive Cauchy combination over default_k_grid(p)
//   MAX, SUM    T_1 and T_p
//   COM, adaQ   competitor combinations
//   T<k>        T_k for a fixed order, e.g. T5
//   T<f>p       T_ceil(f p) for a fraction f in (0, 1], e.g. T0.25p
//   Tp/<d>      T_ceil(p / d), e.g. Tp/8

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lstat/adaptive.hpp"
#include "lstat/core.hpp"
#include "lstat/numstat.hpp"

namespace ltest {

enum class TestKind { LStat, Adaptive, Max, Sum, Com, AdaQ };

class TestId {
 public:
  static TestId parse(std::string_view token);
  static TestId l_stat(std::size_t k);
  static TestId l_stat_fraction(double fraction);
  static TestId of(TestKind kind);

  TestKind kind() const noexcept { return kind_; }
  /// Canonical token; stable across dimensions (T0.5p stays T0.5p).
  const std::string& label() const noexcept { return label_; }
  /// Orders this test needs from the shared bootstrap grid at dimension p.
  std::vector<std::size_t> required_orders(std::size_t p) const;
  /// Resolved order of an LStat test at dimension p.
  std::size_t order(std::size_t p) const;

  bool operator==(const TestId& other) const { return label_ == other.label_; }

 private:
  TestKind kind_ = TestKind::Adaptive;
  std::size_t k_ = 0;       // absolute order, 0 when fractional
  double fraction_ = 0.0;   // ceil(fraction * p) when k_ == 0
  std::string label_;
};

std::vector<TestId> parse_test_list(std::string_view csv);

/// Union of every order required by `tests` at dimension p. A non-empty
/// `adaptive_orders` replaces default_k_grid(p) for TC.
KGrid battery_grid(const std::vector<TestId>& tests, std::size_t p,
                   const std::vector<std::size_t>& adaptive_orders = {});

/// Runs every test on `x` from one wild-bootstrap pass driven by `stream`.
/// Reports come back in the order of `tests`.
std::vector<TestReport> run_battery(const SampleMatrix& x, const std::vector<TestId>& tests,
                                    std::size_t B, double alpha, const RngStream& stream,
                                    unsigned threads = 1,
                                    const std::vector<std::size_t>& adaptive_orders = {});

}  // namespace ltest
