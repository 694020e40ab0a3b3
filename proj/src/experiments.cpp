#include "lstat/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lstat/error.hpp"
#include "lstat/parallel.hpp"

namespace ltest {

Matrix simulate_pvalues(const SimConfig& cfg, const std::vector<TestId>& tests, std::size_t M,
                        const RngStream& stream, const StudyOptions& options) {
  cfg.validate();
  if (tests.empty()) throw DomainError("no tests requested");
  const CovFactor factor = ar1_sqrt(cfg.p, cfg.rho);
  Matrix pvals(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(tests.size()));

  // One flat queue over Monte-Carlo replicates; each bootstrap runs on the
  // worker that owns its replicate.
  parallel_for(M, options.threads, [&](std::size_t m) {
    const RngStream rep = stream.derive(m);
    RngStream data_stream = rep.derive(0);
    const SampleMatrix x = generate(cfg, factor, data_stream);
    const auto reports = run_battery(x, tests, options.B, 0.05, rep.derive(1), 1);
    for (std::size_t t = 0; t < reports.size(); ++t) {
      pvals(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t)) = reports[t].p_value;
    }
  });
  return pvals;
}

namespace {

RateRow make_row(const SimConfig& cfg, const std::string& test, std::size_t rejections,
                 std::size_t reps, double se, bool corrected) {
  RateRow r;
  r.n = cfg.n;
  r.p = cfg.p;
  r.innovation = cfg.innovation;
  r.rho = cfg.rho;
  r.test = test;
  r.s = cfg.s;
  r.kappa = cfg.signal();
  r.rejections = rejections;
  r.reps = reps;
  r.rate = static_cast<double>(rejections) / static_cast<double>(reps);
  r.se = se;
  r.corrected = corrected;
  return r;
}

void check_null(const SimConfig& cfg) {
  if (cfg.s != 0) throw DomainError("null studies need s = 0");
}

}  // namespace

std::vector<RateRow> run_size_study(const SimConfig& null_template,
                                    const std::vector<TestId>& tests, std::size_t M, double alpha,
                                    const RngStream& stream, const StudyOptions& options) {
  check_null(null_template);
  if (M < 1) throw DomainError("size study needs M >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  const Matrix pvals = simulate_pvalues(null_template, tests, M, stream, options);
  const double se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(M));
  std::vector<RateRow> rows;
  for (std::size_t t = 0; t < tests.size(); ++t) {
    const auto col = pvals.col(static_cast<Eigen::Index>(t));
    const auto rejections =
        static_cast<std::size_t>((col.array() <= alpha).count());
    rows.push_back(make_row(null_template, tests[t].label(), rejections, M, se, false));
  }
  return rows;
}

double pvalue_threshold(std::vector<double> null_pvalues, double alpha) {
  if (null_pvalues.empty()) throw DomainError("no null p-values");
  std::sort(null_pvalues.begin(), null_pvalues.end());
  const auto m = static_cast<double>(null_pvalues.size());
  double threshold = 0.0;
  for (std::size_t i = 0; i < null_pvalues.size(); ++i) {
    // Only accept c if every tie at c still keeps F(c) <= alpha.
    std::size_t j = i;
    while (j + 1 < null_pvalues.size() && null_pvalues[j + 1] == null_pvalues[i]) ++j;
    if (static_cast<double>(j + 1) / m > alpha + 1e-12) break;
    threshold = null_pvalues[i];
    i = j;
  }
  return threshold;
}

std::vector<double> empirical_critical_values(const SimConfig& null_template,
                                              const std::vector<TestId>& tests, std::size_t M0,
                                              double alpha, const RngStream& stream,
                                              const StudyOptions& options) {
  check_null(null_template);
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const Matrix pvals = simulate_pvalues(null_template, tests, M0, stream, options);
  std::vector<double> thresholds;
  for (Eigen::Index t = 0; t < pvals.cols(); ++t) {
    const auto col = pvals.col(t);
    thresholds.push_back(pvalue_threshold(std::vector<double>(col.begin(), col.end()), alpha));
  }
  return thresholds;
}

double PowerCurve::power(const std::string& test, std::size_t s) const {
  const auto ti = std::find(tests.begin(), tests.end(), test);
  const auto si = std::find(sparsity_grid.begin(), sparsity_grid.end(), s);
  if (ti == tests.end() || si == sparsity_grid.end()) {
    throw DomainError("power curve has no cell (" + test + ", s=" + std::to_string(s) + ")");
  }
  return estimates(ti - tests.begin(), si - sparsity_grid.begin());
}

PowerCurve run_power_sweep(const SimConfig& scenario_template, const std::vector<TestId>& tests,
                           const std::vector<std::size_t>& sparsity_grid, std::size_t M,
                           const std::vector<double>& thresholds, const RngStream& stream,
                           const StudyOptions& options) {
  if (thresholds.size() != tests.size()) throw DomainError("one threshold per test is required");
  if (sparsity_grid.empty()) throw DomainError("empty sparsity grid");
  PowerCurve curve;
  curve.scenario = scenario_template;
  for (const auto& t : tests) curve.tests.push_back(t.label());
  curve.sparsity_grid = sparsity_grid;
  curve.mc_reps = M;
  curve.corrected = true;
  curve.estimates.resize(static_cast<Eigen::Index>(tests.size()),
                         static_cast<Eigen::Index>(sparsity_grid.size()));

  for (std::size_t g = 0; g < sparsity_grid.size(); ++g) {
    SimConfig cfg = scenario_template;
    cfg.s = sparsity_grid[g];
    const Matrix pvals = simulate_pvalues(cfg, tests, M, stream.derive(g), options);
    for (std::size_t t = 0; t < tests.size(); ++t) {
      const auto col = pvals.col(static_cast<Eigen::Index>(t));
      const auto rejections = static_cast<std::size_t>((col.array() <= thresholds[t]).count());
      const double rate = static_cast<double>(rejections) / static_cast<double>(M);
      const double se = std::sqrt(rate * (1.0 - rate) / static_cast<double>(M));
      curve.estimates(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(g)) = rate;
      curve.rows.push_back(make_row(cfg, tests[t].label(), rejections, M, se, true));
    }
  }
  return curve;
}

void write_rate_csv(std::ostream& out, const std::vector<RateRow>& rows) {
  out << "n,p,innovation,rho,test,s,kappa,rejections,reps,rate,se,corrected\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{:.6f},{},{},{:.6f},{:.6f},{}\n", r.n, r.p,
               to_string(r.innovation), r.rho, r.test, r.s, r.kappa, r.rejections, r.reps, r.rate,
               r.se, r.corrected ? 1 : 0);
  }
}

std::vector<std::size_t> parse_sparsity_grid(const std::string& spec) {
  std::vector<std::size_t> grid;
  auto to_count = [&](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty() || v < 0) {
      throw DomainError("invalid sparsity value '" + s + "'");
    }
    return static_cast<std::size_t>(v);
  };
  if (std::count(spec.begin(), spec.end(), ':') == 2) {
    const auto a = spec.find(':');
    const auto b = spec.find(':', a + 1);
    const std::size_t start = to_count(spec.substr(0, a));
    const std::size_t stop = to_count(spec.substr(a + 1, b - a - 1));
    const std::size_t step = to_count(spec.substr(b + 1));
    if (step == 0 || stop < start) throw DomainError("invalid sparsity range '" + spec + "'");
    for (std::size_t s = start; s <= stop; s += step) grid.push_back(s);
  } else {
    std::size_t start = 0;
    while (start <= spec.size()) {
      const std::size_t end = std::min(spec.find(',', start), spec.size());
      grid.push_back(to_count(spec.substr(start, end - start)));
      start = end + 1;
    }
  }
  if (grid.empty()) throw DomainError("empty sparsity grid");
  return grid;
}

}  // namespace ltest
