#include "lstat/realdata.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lstat/csv.hpp"
#include "lstat/error.hpp"
#include "lstat/parallel.hpp"

namespace ltest {

Matrix ReturnsPanel::excess() const { return returns.colwise() - riskfree; }

ReturnsPanel ReturnsPanel::select(const std::vector<std::size_t>& columns) const {
  ReturnsPanel out;
  out.dates = dates;
  out.riskfree = riskfree;
  out.dropped_rows = dropped_rows;
  out.returns.resize(returns.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= p()) throw DomainError("column index out of range");
    out.tickers.push_back(tickers[columns[j]]);
    out.returns.col(static_cast<Eigen::Index>(j)) =
        returns.col(static_cast<Eigen::Index>(columns[j]));
  }
  return out;
}

namespace {

bool looks_like_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

void check_date(const std::string& date, std::size_t line) {
  if (!looks_like_iso_date(date)) throw DataError("date '" + date + "' is not YYYY-MM-DD", line);
}

}  // namespace

ReturnsPanel load_returns(std::istream& returns_in, std::istream& riskfree_in) {
  const CsvTable rt = read_csv(returns_in);
  const CsvTable ft = read_csv(riskfree_in);
  if (rt.header.size() < 2 || rt.header.front() != "date") {
    throw DataError("returns header must be 'date,<ticker>,...'", 1);
  }
  if (ft.header.size() != 2 || ft.header[0] != "date" || ft.header[1] != "rate") {
    throw DataError("risk-free header must be 'date,rate'", 1);
  }

  std::map<std::string, double> rates;
  for (std::size_t i = 0; i < ft.rows.size(); ++i) {
    const auto& date = ft.rows[i][0];
    check_date(date, ft.lines[i]);
    if (is_missing(ft.rows[i][1])) continue;
    if (!rates.emplace(date, parse_real(ft.rows[i][1], ft.lines[i])).second) {
      throw DataError("misaligned dates: duplicate risk-free date " + date, ft.lines[i]);
    }
  }

  struct Row {
    std::string date;
    std::vector<double> values;
    double rate;
  };
  std::map<std::string, Row> joined;
  std::size_t dropped = 0;
  const std::size_t p = rt.header.size() - 1;
  std::map<std::string, bool> seen;
  for (std::size_t i = 0; i < rt.rows.size(); ++i) {
    const auto& fields = rt.rows[i];
    const auto& date = fields[0];
    check_date(date, rt.lines[i]);
    if (seen.contains(date)) {
      throw DataError("misaligned dates: duplicate returns date " + date, rt.lines[i]);
    }
    seen[date] = true;
    const auto rate = rates.find(date);
    const bool gap = std::any_of(fields.begin() + 1, fields.end(),
                                 [](const std::string& f) { return is_missing(f); });
    if (rate == rates.end() || gap) {
      ++dropped;
      continue;
    }
    Row row{date, std::vector<double>(p), rate->second};
    for (std::size_t j = 0; j < p; ++j) row.values[j] = parse_real(fields[j + 1], rt.lines[i]);
    joined.emplace(date, std::move(row));
  }
  if (joined.empty()) throw DataError("returns and risk-free files share no complete dates");
  if (joined.size() < kMinPeriods) {
    throw DataError("only " + std::to_string(joined.size()) + " complete periods; need at least " +
                    std::to_string(kMinPeriods));
  }

  ReturnsPanel panel;
  panel.tickers.assign(rt.header.begin() + 1, rt.header.end());
  panel.returns.resize(static_cast<Eigen::Index>(joined.size()), static_cast<Eigen::Index>(p));
  panel.riskfree.resize(static_cast<Eigen::Index>(joined.size()));
  Eigen::Index i = 0;
  for (auto& [date, row] : joined) {  // std::map iterates in date order
    panel.dates.push_back(date);
    panel.riskfree[i] = row.rate;
    for (std::size_t j = 0; j < p; ++j) panel.returns(i, static_cast<Eigen::Index>(j)) = row.values[j];
    ++i;
  }
  panel.dropped_rows = dropped;
  return panel;
}

ReturnsPanel load_returns(const std::string& returns_path, const std::string& riskfree_path) {
  std::ifstream r(returns_path);
  if (!r) throw DataError("cannot open '" + returns_path + "'");
  std::ifstream f(riskfree_path);
  if (!f) throw DataError("cannot open '" + riskfree_path + "'");
  try {
    return load_returns(r, f);
  } catch (const DataError& e) {
    throw DataError(returns_path + " / " + riskfree_path + ": " + e.what());
  }
}

LjungBoxResult ljung_box(std::span<const double> series, std::size_t lag) {
  const std::size_t T = series.size();
  if (lag < 1 || 2 * lag >= T) throw DomainError("Ljung-Box lag must satisfy 1 <= lag < T/2");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(T);
  double denom = 0.0;
  for (double v : series) denom += (v - mean) * (v - mean);
  if (!(denom > 0.0)) throw DataError("degenerate series: zero variance");

  double q = 0.0;
  for (std::size_t k = 1; k <= lag; ++k) {
    double num = 0.0;
    for (std::size_t t = k; t < T; ++t) num += (series[t] - mean) * (series[t - k] - mean);
    const double rho = num / denom;
    q += rho * rho / static_cast<double>(T - k);
  }
  q *= static_cast<double>(T) * static_cast<double>(T + 2);
  return {q, chisq_sf(q, static_cast<unsigned>(lag))};
}

ScreeningResult screen_autocorrelation(const ReturnsPanel& panel, std::size_t lag, double level) {
  ScreeningResult out;
  out.lag = lag;
  out.level = level;
  const Matrix x = panel.excess();
  for (std::size_t j = 0; j < panel.p(); ++j) {
    const auto col = x.col(static_cast<Eigen::Index>(j));
    const auto lb = ljung_box({col.data(), static_cast<std::size_t>(col.size())}, lag);
    const bool keep = level <= 0.0 || lb.p_value > level;
    out.screened.push_back({panel.tickers[j], lb.q, lb.p_value, keep});
    if (keep) {
      out.kept.push_back(panel.tickers[j]);
      out.kept_columns.push_back(j);
    } else {
      out.dropped.push_back(panel.tickers[j]);
    }
  }
  return out;
}

std::vector<std::size_t> bh_discoveries(std::span<const double> pvals, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("FDR level must lie in (0, 1)");
  const std::size_t m = pvals.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  std::size_t cut = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (pvals[order[i]] <= static_cast<double>(i + 1) * q / static_cast<double>(m)) cut = i + 1;
  }
  std::vector<std::size_t> hits(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  std::sort(hits.begin(), hits.end());
  return hits;
}

std::vector<StockRow> per_stock_table(const ReturnsPanel& panel, double fdr) {
  const SampleMatrix x(panel.excess());
  const TStatPanel t = t_statistics(x);
  const boost::math::students_t_distribution<double> ref(static_cast<double>(x.n() - 1));
  std::vector<StockRow> rows(panel.p());
  std::vector<double> pvals(panel.p());
  for (std::size_t j = 0; j < panel.p(); ++j) {
    rows[j].ticker = panel.tickers[j];
    rows[j].t_stat = t.t[j];
    rows[j].p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(ref, std::fabs(t.t[j]))));
    pvals[j] = rows[j].p_value;
  }
  for (std::size_t j : bh_discoveries(pvals, fdr)) rows[j].bh_reject = true;
  return rows;
}

std::vector<SubsampleRow> subsample_study(const ReturnsPanel& panel,
                                          const std::vector<std::size_t>& n_list,
                                          const std::vector<TestId>& tests, std::size_t M,
                                          std::size_t B, double alpha, const RngStream& stream,
                                          unsigned threads) {
  if (M < 1) throw DomainError("subsample study needs M >= 1");
  const Matrix x = panel.excess();
  const std::size_t T = panel.T();
  std::vector<SubsampleRow> rows;
  for (std::size_t g = 0; g < n_list.size(); ++g) {
    const std::size_t n = n_list[g];
    if (n < SampleMatrix::kMinRows || n > T) {
      throw DomainError("subsample size " + std::to_string(n) + " outside [4, T]");
    }
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> reject(static_cast<Eigen::Index>(M),
                                                              static_cast<Eigen::Index>(tests.size()));
    const RngStream size_stream = stream.derive(g);
    parallel_for(M, threads, [&](std::size_t m) {
      const RngStream rep = size_stream.derive(m);
      RngStream pick = rep.derive(0);
      // Partial Fisher-Yates: the first n slots become a uniform n-subset.
      std::vector<std::size_t> idx(T);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(pick.uniform() * static_cast<double>(T - i));
        std::swap(idx[i], idx[std::min(j, T - 1)]);
      }
      std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
      Matrix sub(static_cast<Eigen::Index>(n), x.cols());
      for (std::size_t i = 0; i < n; ++i) sub.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
      const auto reports = run_battery(SampleMatrix(std::move(sub)), tests, B, alpha, rep.derive(1), 1);
      for (std::size_t t = 0; t < reports.size(); ++t) {
        reject(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t)) = reports[t].reject ? 1 : 0;
      }
    });
    for (std::size_t t = 0; t < tests.size(); ++t) {
      SubsampleRow r;
      r.n = n;
      r.test = tests[t].label();
      r.rejections = static_cast<std::size_t>(reject.col(static_cast<Eigen::Index>(t)).sum());
      r.reps = M;
      r.rate = static_cast<double>(r.rejections) / static_cast<double>(M);
      r.se = std::sqrt(r.rate * (1.0 - r.rate) / static_cast<double>(M));
      rows.push_back(r);
    }
  }
  return rows;
}

SyntheticReturns synthetic_returns(const SyntheticReturnsConfig& cfg, const RngStream& stream) {
  if (cfg.T < kMinPeriods) throw DomainError("synthetic panel needs T >= 30");
  if (cfg.autocorrelated + cfg.planted + cfg.dense > cfg.p) {
    throw DomainError("synthetic panel: autocorrelated + planted + dense exceeds p");
  }
  if (!(cfg.ar_coef >= 0.0 && cfg.ar_coef < 1.0)) throw DomainError("ar_coef must lie in [0, 1)");
  const auto T = static_cast<Eigen::Index>(cfg.T);
  const auto p = static_cast<Eigen::Index>(cfg.p);

  // Column roles are assigned by a seeded shuffle: autocorrelated first, then
  // planted, then dense, the rest pure noise.
  RngStream roles = stream.derive(0);
  std::vector<std::size_t> perm(cfg.p);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), roles);
  enum class Role { Noise, Autocorrelated, Planted, Dense };
  std::vector<Role> role(cfg.p, Role::Noise);
  std::size_t at = 0;
  for (std::size_t i = 0; i < cfg.autocorrelated; ++i) role[perm[at++]] = Role::Autocorrelated;
  for (std::size_t i = 0; i < cfg.planted; ++i) role[perm[at++]] = Role::Planted;
  for (std::size_t i = 0; i < cfg.dense; ++i) role[perm[at++]] = Role::Dense;

  RngStream noise = stream.derive(1);
  std::normal_distribution<double> normal;
  Vector market(T);
  for (Eigen::Index i = 0; i < T; ++i) market[i] = cfg.market_vol * normal(noise);

  const double total_vol = std::hypot(cfg.market_vol, cfg.idio_vol);
  const double root_t = std::sqrt(static_cast<double>(cfg.T));
  SyntheticReturns out;
  out.panel.returns.resize(T, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Role r = role[static_cast<std::size_t>(j)];
    double mean = 0.0;
    if (r == Role::Planted) mean = cfg.planted_t * total_vol / root_t;
    if (r == Role::Dense) mean = cfg.dense_t * total_vol / root_t;
    const double innovation_scale =
        r == Role::Autocorrelated ? cfg.idio_vol * std::sqrt(1.0 - cfg.ar_coef * cfg.ar_coef)
                                  : cfg.idio_vol;
    double prev = cfg.idio_vol * normal(noise);
    for (Eigen::Index i = 0; i < T; ++i) {
      double e = innovation_scale * normal(noise);
      if (r == Role::Autocorrelated) {
        e += cfg.ar_coef * prev;
        prev = e;
      }
      out.panel.returns(i, j) = mean + market[i] + e;
    }
    out.panel.tickers.push_back(fmt::format("S{:03d}", j + 1));
    if (r == Role::Planted) out.planted.push_back(out.panel.tickers.back());
  }

  out.panel.riskfree.resize(T);
  RngStream rf = stream.derive(2);
  using namespace std::chrono;
  sys_days day = year{2009} / February / 6;
  for (Eigen::Index i = 0; i < T; ++i) {
    out.panel.riskfree[i] = cfg.riskfree * (1.0 + 0.1 * (rf.uniform() - 0.5));
    out.panel.returns.row(i).array() += out.panel.riskfree[i];
    const year_month_day ymd{day};
    out.panel.dates.push_back(fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                                          static_cast<unsigned>(ymd.month()),
                                          static_cast<unsigned>(ymd.day())));
    day += days{7};
  }
  return out;
}

void write_returns_csv(const ReturnsPanel& panel, std::ostream& returns, std::ostream& riskfree) {
  returns << "date";
  for (const auto& t : panel.tickers) returns << ',' << t;
  returns << '\n';
  riskfree << "date,rate\n";
  for (std::size_t i = 0; i < panel.T(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    returns << panel.dates[i];
    for (Eigen::Index j = 0; j < panel.returns.cols(); ++j) {
      fmt::print(returns, ",{:.17g}", panel.returns(row, j));
    }
    returns << '\n';
    fmt::print(riskfree, "{},{:.17g}\n", panel.dates[i], panel.riskfree[row]);
  }
}

void write_stock_csv(std::ostream& out, const std::vector<StockRow>& rows) {
  out << "ticker,t_stat,p_value,bh_reject\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{:.10g},{:.10g},{}\n", r.ticker, r.t_stat, r.p_value, r.bh_reject ? 1 : 0);
  }
}

void write_subsample_csv(std::ostream& out, const std::vector<SubsampleRow>& rows) {
  out << "n,test,rate,se\n";
  for (const auto& r : rows) fmt::print(out, "{},{},{:.6f},{:.6f}\n", r.n, r.test, r.rate, r.se);
}

void write_screening_csv(std::ostream& out, const ScreeningResult& result) {
  out << "ticker,kept,q,p_value\n";
  for (const auto& t : result.screened) {
    fmt::print(out, "{},{},{:.10g},{:.10g}\n", t.ticker, t.kept ? 1 : 0, t.q, t.p_value);
  }
}

}  // namespace ltest
