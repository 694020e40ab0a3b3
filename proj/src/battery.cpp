#include "lstat/battery.hpp"

#include <cmath>
#include <charconv>
#include <fmt/format.h>

#include "lstat/competitors.hpp"
#include "lstat/error.hpp"

namespace ltest {

namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

TestId TestId::of(TestKind kind) {
  TestId id;
  id.kind_ = kind;
  switch (kind) {
    case TestKind::Adaptive: id.label_ = "TC"; break;
    case TestKind::Max: id.label_ = "MAX"; break;
    case TestKind::Sum: id.label_ = "SUM"; break;
    case TestKind::Com: id.label_ = "COM"; break;
    case TestKind::AdaQ: id.label_ = "adaQ"; break;
    case TestKind::LStat: throw DomainError("use TestId::l_stat for L-statistic tests");
  }
  return id;
}

TestId TestId::l_stat(std::size_t k) {
  if (k < 1) throw DomainError("L-statistic order must be >= 1");
  TestId id;
  id.kind_ = TestKind::LStat;
  id.k_ = k;
  id.label_ = fmt::format("T{}", k);
  return id;
}

TestId TestId::l_stat_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError("L-statistic fraction must lie in (0, 1]");
  }
  TestId id;
  id.kind_ = TestKind::LStat;
  id.fraction_ = fraction;
  id.label_ = fmt::format("T{}p", fraction);
  return id;
}

TestId TestId::parse(std::string_view token) {
  if (token == "TC" || token == "T_C") return of(TestKind::Adaptive);
  if (token == "MAX") return of(TestKind::Max);
  if (token == "SUM") return of(TestKind::Sum);
  if (token == "COM") return of(TestKind::Com);
  if (token == "adaQ" || token == "ADAQ") return of(TestKind::AdaQ);
  if (token.size() >= 2 && token.front() == 'T') {
    std::string_view rest = token.substr(1);
    if (!rest.empty() && rest.front() == '_') rest.remove_prefix(1);
    std::size_t k = 0;
    if (parse_number(rest, k) && k >= 1) return l_stat(k);
    if (rest.starts_with("p/")) {
      std::size_t d = 0;
      if (parse_number(rest.substr(2), d) && d >= 1) {
        TestId id = l_stat_fraction(1.0 / static_cast<double>(d));
        id.label_ = fmt::format("Tp/{}", d);
        return id;
      }
    }
    if (rest == "p") {
      TestId id = l_stat_fraction(1.0);
      id.label_ = "Tp";
      return id;
    }
    if (rest.size() >= 2 && rest.back() == 'p') {
      double f = 0.0;
      if (parse_number(rest.substr(0, rest.size() - 1), f) && f > 0.0 && f <= 1.0) {
        return l_stat_fraction(f);
      }
    }
  }
  throw DomainError("unknown test '" + std::string(token) + "'");
}

std::vector<TestId> parse_test_list(std::string_view csv) {
  std::vector<TestId> tests;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t end = std::min(csv.find(',', start), csv.size());
    std::string_view tok = csv.substr(start, end - start);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (tok.empty()) throw DomainError("empty entry in test list '" + std::string(csv) + "'");
    tests.push_back(TestId::parse(tok));
    start = end + 1;
  }
  if (tests.empty()) throw DomainError("empty test list");
  return tests;
}

std::size_t TestId::order(std::size_t p) const {
  if (kind_ != TestKind::LStat) throw DomainError(label_ + " is not a single-order test");
  const std::size_t k =
      k_ > 0 ? k_ : static_cast<std::size_t>(std::ceil(fraction_ * static_cast<double>(p) - 1e-9));
  if (k < 1 || k > p) {
    throw DomainError(label_ + " resolves to order " + std::to_string(k) + " outside [1, " +
                      std::to_string(p) + "]");
  }
  return k;
}

std::vector<std::size_t> TestId::required_orders(std::size_t p) const {
  switch (kind_) {
    case TestKind::LStat: return {order(p)};
    case TestKind::Adaptive: return default_k_grid(p).ks();
    case TestKind::Max: return {1};
    case TestKind::Sum: return {p};
    case TestKind::Com: return {1, p};
    case TestKind::AdaQ: return {1};
  }
  return {};
}

KGrid battery_grid(const std::vector<TestId>& tests, std::size_t p,
                   const std::vector<std::size_t>& adaptive_orders) {
  std::vector<std::size_t> ks;
  for (const auto& t : tests) {
    const auto req = t.kind() == TestKind::Adaptive && !adaptive_orders.empty()
                         ? adaptive_orders
                         : t.required_orders(p);
    ks.insert(ks.end(), req.begin(), req.end());
  }
  return make_k_grid(std::move(ks), p);
}

std::vector<TestReport> run_battery(const SampleMatrix& x, const std::vector<TestId>& tests,
                                    std::size_t B, double alpha, const RngStream& stream,
                                    unsigned threads,
                                    const std::vector<std::size_t>& adaptive_orders) {
  const KGrid grid = battery_grid(tests, x.p(), adaptive_orders);
  const auto dist = wild_bootstrap(x, grid, B, stream, threads);
  const TStatPanel panel = t_statistics(x);

  std::vector<TestReport> reports;
  reports.reserve(tests.size());
  for (const auto& t : tests) {
    switch (t.kind()) {
      case TestKind::LStat: {
        const std::size_t k = t.order(x.p());
        reports.push_back(l_test(panel, dist, k, default_calibration(k), alpha));
        break;
      }
      case TestKind::Adaptive:
        reports.push_back(adaptive_orders.empty()
                              ? adaptive_l_test(panel, dist, alpha)
                              : adaptive_l_test(panel, dist, make_k_grid(adaptive_orders, x.p()),
                                                alpha));
        break;
      case TestKind::Max: reports.push_back(max_test(panel, dist, alpha)); break;
      case TestKind::Sum: reports.push_back(sum_test(panel, dist, alpha)); break;
      case TestKind::Com: reports.push_back(com_test(panel, dist, alpha)); break;
      case TestKind::AdaQ: reports.push_back(adaq_test(x, panel, dist, alpha)); break;
    }
  }
  return reports;
}

}  // namespace ltest
