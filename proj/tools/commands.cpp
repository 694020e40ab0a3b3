#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "lstat/battery.hpp"
#include "lstat/csv.hpp"
#include "lstat/error.hpp"
#include "lstat/experiments.hpp"
#include "lstat/parallel.hpp"
#include "lstat/realdata.hpp"
#include "lstat/simgen.hpp"

namespace ltest::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct TestArgs {
  std::string input;
  std::string tests = "TC";
  double alpha = 0.05;
  std::size_t B = kDefaultBootstrapReps;
  std::uint64_t seed = 1;
  std::string k_grid;
  std::string json_path;
  std::string manifest_path;
  unsigned threads = 0;
};

struct SimulateArgs {
  std::size_t n = 100;
  std::size_t p = 100;
  std::string innovation = "normal";
  double rho = 0.5;
  std::string sparsity_grid = "0";
  std::size_t M = 1000;
  std::size_t M0 = 0;
  std::size_t B = kDefaultBootstrapReps;
  double alpha = 0.05;
  std::string tests = "T5,T0.25p,T0.5p,TC";
  std::optional<double> kappa;
  std::uint64_t seed = 1;
  std::string out = ".";
  unsigned threads = 0;
};

struct PortfolioArgs {
  std::string returns;
  std::string riskfree;
  std::size_t lag = kDefaultLjungBoxLag;
  double level = 0.05;
  double fdr = 0.01;
  std::string n_list = "100,150,200,250,300";
  std::size_t M = 1000;
  std::size_t B = kDefaultBootstrapReps;
  double alpha = 0.05;
  std::string tests = "MAX,T5,Tp/8,Tp/4,Tp/2,SUM,TC,COM,adaQ";
  std::uint64_t seed = 1;
  std::string out = ".";
  unsigned threads = 0;
};

struct SynthArgs {
  SyntheticReturnsConfig cfg;
  std::uint64_t seed = 1;
  std::string out = ".";
};

struct ReplayArgs {
  std::string manifest;
  std::string out;
};

unsigned resolve_threads(unsigned requested) {
  return requested == 0 ? default_threads() : requested;
}

std::vector<std::size_t> parse_orders(const std::string& spec) {
  if (spec.empty()) return {};
  auto orders = parse_sparsity_grid(spec);
  for (auto k : orders) {
    if (k == 0) throw DomainError("k-grid entries must be positive");
  }
  return orders;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  body(f);
  if (!f) throw DataError("write failed: " + path.string());
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json base_manifest(const std::string& command, const std::vector<std::string>& args) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["args"] = args;
  return m;
}

void finish_manifest(json& m, Clock::time_point start) {
  m["started_utc"] = utc_now();
  m["wall_time_seconds"] =
      std::chrono::duration<double>(Clock::now() - start).count();
}

json labels(const std::vector<TestId>& tests) {
  json a = json::array();
  for (const auto& t : tests) a.push_back(t.label());
  return a;
}

// --- test ------------------------------------------------------------------

int cmd_test(const TestArgs& a, const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  const auto start = Clock::now();
  const auto tests = parse_test_list(a.tests);
  const auto orders = parse_orders(a.k_grid);
  const auto csv = read_numeric_csv_file(a.input);
  const SampleMatrix x(csv.values);
  const RngStream stream(a.seed);
  const auto reports = run_battery(x, tests, a.B, a.alpha, stream, resolve_threads(a.threads),
                                   orders);

  out << fmt::format("input {} (n={}, p={}), B={}, seed={}\n", a.input, x.n(), x.p(), a.B,
                     a.seed);
  out << fmt::format("{:<10} {:>14} {:>12}  {}\n", "test", "statistic", "p_value", "decision");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out << fmt::format("{:<10} {:>14.6f} {:>12.6f}  {} at alpha={}\n", tests[i].label(),
                       r.statistic, r.p_value.value(), r.reject ? "reject H0" : "retain H0",
                       r.alpha);
  }

  const auto grid = battery_grid(tests, x.p(), orders);
  if (!a.json_path.empty()) {
    json doc;
    doc["input"] = a.input;
    doc["n"] = x.n();
    doc["p"] = x.p();
    doc["B"] = a.B;
    doc["seed"] = a.seed;
    doc["alpha"] = a.alpha;
    doc["grid"] = grid.ks();
    json reps = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      json meta = json::object();
      for (const auto& [k, v] : r.meta) meta[k] = v;
      reps.push_back({{"test", tests[i].label()},
                      {"name", r.name},
                      {"statistic", r.statistic},
                      {"p_value", r.p_value.value()},
                      {"alpha", r.alpha},
                      {"reject", r.reject},
                      {"meta", meta}});
    }
    doc["reports"] = reps;
    write_file(a.json_path, [&](std::ostream& f) { f << doc.dump(2) << '\n'; });
  }

  json m = base_manifest("test", args);
  m["master_seed"] = a.seed;
  m["B"] = a.B;
  m["M"] = nullptr;
  m["alpha"] = a.alpha;
  m["grid"] = grid.ks();
  m["config"] = {{"input", a.input}, {"tests", labels(tests)}, {"k_grid", a.k_grid},
                 {"threads", a.threads}};
  finish_manifest(m, start);
  std::string manifest_path = a.manifest_path;
  if (manifest_path.empty() && !a.json_path.empty()) {
    manifest_path = fs::path(a.json_path).replace_extension(".manifest.json").string();
  }
  if (manifest_path.empty()) {
    err << "manifest: " << m.dump() << '\n';
  } else {
    write_file(manifest_path, [&](std::ostream& f) { f << m.dump(2) << '\n'; });
  }
  return kExitOk;
}

// --- simulate --------------------------------------------------------------

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  const auto start = Clock::now();
  const auto tests = parse_test_list(a.tests);
  const auto grid = parse_sparsity_grid(a.sparsity_grid);
  SimConfig cfg;
  cfg.n = a.n;
  cfg.p = a.p;
  cfg.rho = a.rho;
  cfg.innovation = parse_innovation(a.innovation);
  cfg.kappa = a.kappa;
  cfg.seed = a.seed;
  cfg.s = 0;
  cfg.validate();
  if (a.M == 0) throw DomainError("--M must be positive");
  for (auto s : grid) {
    if (s > a.p) throw DomainError(fmt::format("sparsity {} exceeds p={}", s, a.p));
  }
  const std::size_t M0 = a.M0 == 0 ? a.M : a.M0;
  const StudyOptions opts{a.B, resolve_threads(a.threads)};
  const RngStream master(a.seed);
  const fs::path dir = prepare_out_dir(a.out);
  std::vector<std::string> written;

  const bool size_only = grid.size() == 1 && grid.front() == 0;
  json m = base_manifest("simulate", args);
  if (size_only) {
    err << fmt::format("simulate: size study n={} p={} {} rho={} M={} B={}\n", a.n, a.p,
                       to_string(cfg.innovation), a.rho, a.M, a.B);
    const auto rows = run_size_study(cfg, tests, a.M, a.alpha, master.derive(0), opts);
    write_file(dir / "size.csv", [&](std::ostream& f) { write_rate_csv(f, rows); });
    written.push_back("size.csv");
    for (const auto& r : rows) {
      out << fmt::format("{:<10} size={:.3f} (se {:.3f})\n", r.test, r.rate, r.se);
    }
  } else {
    err << fmt::format("simulate: null calibration M0={} ({} tests)\n", M0, tests.size());
    const auto thresholds =
        empirical_critical_values(cfg, tests, M0, a.alpha, master.derive(0), opts);
    write_file(dir / "thresholds.csv", [&](std::ostream& f) {
      f << "test,alpha,M0,threshold\n";
      for (std::size_t i = 0; i < tests.size(); ++i) {
        f << fmt::format("{},{},{},{:.6f}\n", tests[i].label(), a.alpha, M0, thresholds[i]);
      }
    });
    written.push_back("thresholds.csv");
    err << fmt::format("simulate: power sweep over {} sparsity levels, M={}\n", grid.size(),
                       a.M);
    const auto curve =
        run_power_sweep(cfg, tests, grid, a.M, thresholds, master.derive(1), opts);
    write_file(dir / "power.csv", [&](std::ostream& f) { write_rate_csv(f, curve.rows); });
    written.push_back("power.csv");
    out << fmt::format("{:<10}", "s");
    for (const auto& t : tests) out << fmt::format(" {:>9}", t.label());
    out << '\n';
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out << fmt::format("{:<10}", grid[g]);
      for (std::size_t t = 0; t < tests.size(); ++t) {
        out << fmt::format(" {:>9.3f}", curve.estimates(static_cast<Eigen::Index>(t),
                                                         static_cast<Eigen::Index>(g)));
      }
      out << '\n';
    }
  }

  m["master_seed"] = a.seed;
  m["B"] = a.B;
  m["M"] = a.M;
  m["M0"] = size_only ? json(nullptr) : json(M0);
  m["alpha"] = a.alpha;
  m["grid"] = battery_grid(tests, a.p).ks();
  m["config"] = {{"n", a.n},
                 {"p", a.p},
                 {"innovation", to_string(cfg.innovation)},
                 {"rho", a.rho},
                 {"sparsity_grid", grid},
                 {"kappa", a.kappa ? json(*a.kappa) : json(nullptr)},
                 {"tests", labels(tests)},
                 {"threads", a.threads}};
  m["outputs"] = written;
  finish_manifest(m, start);
  write_file(dir / "manifest.json", [&](std::ostream& f) { f << m.dump(2) << '\n'; });
  err << fmt::format("simulate: wrote {} in {:.1f} s\n", (dir / "").string(),
                     m["wall_time_seconds"].get<double>());
  return kExitOk;
}

// --- portfolio -------------------------------------------------------------

int cmd_portfolio(const PortfolioArgs& a, const std::vector<std::string>& args,
                  std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const auto tests = parse_test_list(a.tests);
  const auto n_list = parse_sparsity_grid(a.n_list);
  const auto panel = load_returns(a.returns, a.riskfree);
  err << fmt::format("portfolio: T={} periods, p={} tickers, {} rows dropped\n", panel.T(),
                     panel.p(), panel.dropped_rows);

  const auto screening = screen_autocorrelation(panel, a.lag, a.level);
  const auto kept = panel.select(screening.kept_columns);
  const auto stocks = per_stock_table(kept, a.fdr);
  const auto discoveries = std::count_if(stocks.begin(), stocks.end(),
                                         [](const StockRow& r) { return r.bh_reject; });

  const RngStream master(a.seed);
  const unsigned threads = resolve_threads(a.threads);
  const SampleMatrix full(kept.excess());
  const auto reports = run_battery(full, tests, a.B, a.alpha, master.derive(0), threads);
  err << fmt::format("portfolio: subsample study n in {{{}}} with M={}\n", a.n_list, a.M);
  const auto study =
      subsample_study(kept, n_list, tests, a.M, a.B, a.alpha, master.derive(1), threads);

  const fs::path dir = prepare_out_dir(a.out);
  write_file(dir / "screening.csv",
             [&](std::ostream& f) { write_screening_csv(f, screening); });
  write_file(dir / "stocks.csv", [&](std::ostream& f) { write_stock_csv(f, stocks); });
  write_file(dir / "full_sample.csv", [&](std::ostream& f) {
    f << "test,statistic,p_value,reject\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      f << fmt::format("{},{:.6f},{:.6f},{}\n", tests[i].label(), reports[i].statistic,
                       reports[i].p_value.value(), reports[i].reject ? 1 : 0);
    }
  });
  write_file(dir / "study.csv", [&](std::ostream& f) { write_subsample_csv(f, study); });

  out << fmt::format("screening: kept {} of {} (Ljung-Box lag {}, level {})\n",
                     screening.kept.size(), panel.p(), a.lag, a.level);
  out << fmt::format("per-stock BH discoveries at FDR {}: {}\n", a.fdr, discoveries);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << fmt::format("{:<10} p={:.4f}  {}\n", tests[i].label(), reports[i].p_value.value(),
                       reports[i].reject ? "reject" : "retain");
  }

  json m = base_manifest("portfolio", args);
  m["master_seed"] = a.seed;
  m["B"] = a.B;
  m["M"] = a.M;
  m["alpha"] = a.alpha;
  m["grid"] = battery_grid(tests, kept.p()).ks();
  m["config"] = {{"returns", a.returns}, {"riskfree", a.riskfree}, {"lag", a.lag},
                 {"level", a.level},     {"fdr", a.fdr},           {"n_list", n_list},
                 {"tests", labels(tests)}, {"threads", a.threads}};
  m["summary"] = {{"T", panel.T()},
                  {"p", panel.p()},
                  {"dropped_rows", panel.dropped_rows},
                  {"kept", screening.kept.size()},
                  {"discoveries", discoveries}};
  m["outputs"] = {"screening.csv", "stocks.csv", "full_sample.csv", "study.csv"};
  finish_manifest(m, start);
  write_file(dir / "manifest.json", [&](std::ostream& f) { f << m.dump(2) << '\n'; });
  return kExitOk;
}

// --- synth-returns -----------------------------------------------------------

int cmd_synth(const SynthArgs& a, const std::vector<std::string>& args, std::ostream& out,
              std::ostream&) {
  const auto start = Clock::now();
  const auto synth = synthetic_returns(a.cfg, RngStream(a.seed));
  const fs::path dir = prepare_out_dir(a.out);
  std::ostringstream returns, riskfree;
  write_returns_csv(synth.panel, returns, riskfree);
  write_file(dir / "returns.csv", [&](std::ostream& f) { f << returns.str(); });
  write_file(dir / "riskfree.csv", [&](std::ostream& f) { f << riskfree.str(); });
  write_file(dir / "planted.txt", [&](std::ostream& f) {
    for (const auto& t : synth.planted) f << t << '\n';
  });
  const auto& c = a.cfg;
  json m = base_manifest("synth-returns", args);
  m["master_seed"] = a.seed;
  m["B"] = nullptr;
  m["M"] = nullptr;
  m["alpha"] = nullptr;
  m["grid"] = nullptr;
  m["config"] = {{"T", c.T},           {"p", c.p},
                 {"autocorrelated", c.autocorrelated}, {"ar_coef", c.ar_coef},
                 {"planted", c.planted}, {"planted_t", c.planted_t},
                 {"dense", c.dense},     {"dense_t", c.dense_t}};
  m["outputs"] = {"returns.csv", "riskfree.csv", "planted.txt"};
  finish_manifest(m, start);
  write_file(dir / "manifest.json", [&](std::ostream& f) { f << m.dump(2) << '\n'; });
  out << fmt::format("wrote {} periods x {} tickers ({} planted) to {}\n", synth.panel.T(),
                     synth.panel.p(), synth.planted.size(), dir.string());
  return kExitOk;
}

// --- config injection --------------------------------------------------------

std::string option_name(const std::string& arg) {
  if (arg.rfind("--", 0) != 0) return {};
  return arg.substr(2, arg.find('=') - 2);
}

// Values from `--config FILE` (plain `key = value` lines, optionally under a
// [subcommand] section) become extra arguments unless the flag was given.
std::vector<std::string> inject_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  const std::string& sub = args.front();
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto name = option_name(args[i]);
    if (name.empty()) continue;
    given.insert(name);
    if (name == "config") {
      const auto eq = args[i].find('=');
      if (eq != std::string::npos) {
        path = args[i].substr(eq + 1);
      } else if (i + 1 < args.size()) {
        path = args[i + 1];
      }
    }
  }
  if (path.empty()) return args;
  if (!fs::exists(path)) throw CLI::FileError::Missing(path);
  std::vector<CLI::ConfigItem> items = CLI::ConfigINI().from_file(path);

  std::vector<std::string> result = args;
  for (const auto& item : items) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub)) continue;
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string name = item.name;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "config" || given.count(name) != 0) continue;
    std::string value;
    for (std::size_t j = 0; j < item.inputs.size(); ++j) {
      if (j) value += ',';
      value += item.inputs[j];
    }
    result.push_back("--" + name);
    result.push_back(value);
  }
  return result;
}

// --- parser ------------------------------------------------------------------

struct Parsed {
  std::unique_ptr<CLI::App> app;
  CLI::App* test = nullptr;
  CLI::App* simulate = nullptr;
  CLI::App* portfolio = nullptr;
  CLI::App* synth = nullptr;
  CLI::App* replay = nullptr;
  TestArgs test_args;
  SimulateArgs sim_args;
  PortfolioArgs port_args;
  SynthArgs synth_args;
  ReplayArgs replay_args;
  std::string config;
};

void add_threads(CLI::App* sub, unsigned& threads) {
  sub->add_option("--threads", threads, "Worker threads (0 = hardware parallelism)")
      ->capture_default_str();
}

void build_parser(Parsed& P) {
  P.app = std::make_unique<CLI::App>("High-dimensional mean tests built on L-statistics of "
                                     "squared t-statistics",
                                     "lstat");
  auto& app = *P.app;
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough(false);

  auto* t = P.test = app.add_subcommand("test", "Test H0: mean = 0 on an n x p CSV");
  auto& ta = P.test_args;
  t->add_option("input", ta.input, "Numeric CSV with a header row")->required();
  t->add_option("--tests", ta.tests, "Comma-separated tests: TC, T<k>, T<f>p, Tp/<d>, MAX, SUM, "
                                     "COM, adaQ")
      ->capture_default_str();
  t->add_option("--alpha", ta.alpha, "Significance level")->capture_default_str();
  t->add_option("--B", ta.B, "Bootstrap replicates")->capture_default_str();
  t->add_option("--seed", ta.seed, "Master seed")->capture_default_str();
  t->add_option("--k-grid", ta.k_grid, "Orders combined by TC, e.g. 5,25,50 (default: 5 and "
                                       "halvings of p)");
  t->add_option("--json", ta.json_path, "Write reports as JSON to this file");
  t->add_option("--manifest", ta.manifest_path,
                "Run manifest path (default: next to --json, else stderr)");
  add_threads(t, ta.threads);
  t->add_option("--config", P.config, "key = value file; flags override it");

  auto* s = P.simulate = app.add_subcommand("simulate", "Monte-Carlo size or power study");
  auto& sa = P.sim_args;
  s->add_option("--n", sa.n, "Sample size")->capture_default_str();
  s->add_option("--p", sa.p, "Dimension")->capture_default_str();
  s->add_option("--innovation", sa.innovation, "normal | t3 | mixnormal")->capture_default_str();
  s->add_option("--rho", sa.rho, "AR(1) correlation")->capture_default_str();
  s->add_option("--sparsity-grid", sa.sparsity_grid,
                "0 for a size study, else a list a,b,c or start:stop:step")
      ->capture_default_str();
  s->add_option("--M", sa.M, "Monte-Carlo replicates per cell")->capture_default_str();
  s->add_option("--M0", sa.M0, "Null replicates for size correction (0 = M)")
      ->capture_default_str();
  s->add_option("--B", sa.B, "Bootstrap replicates")->capture_default_str();
  s->add_option("--alpha", sa.alpha, "Significance level")->capture_default_str();
  s->add_option("--tests", sa.tests, "Comma-separated tests")->capture_default_str();
  s->add_option("--kappa", sa.kappa, "Signal magnitude (default 3 sqrt(log p / (n s)))");
  s->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
  s->add_option("--out", sa.out, "Output directory")->capture_default_str();
  add_threads(s, sa.threads);
  s->add_option("--config", P.config, "key = value file; flags override it");

  auto* pf = P.portfolio = app.add_subcommand("portfolio", "Excess-return pipeline");
  auto& pa = P.port_args;
  pf->add_option("--returns", pa.returns, "Wide CSV: date,<ticker>...")->required();
  pf->add_option("--riskfree", pa.riskfree, "CSV: date,rate")->required();
  pf->add_option("--lag", pa.lag, "Ljung-Box lag")->capture_default_str();
  pf->add_option("--level", pa.level, "Screening level (<= 0 keeps all)")->capture_default_str();
  pf->add_option("--fdr", pa.fdr, "Benjamini-Hochberg FDR")->capture_default_str();
  pf->add_option("--n-list", pa.n_list, "Subsample sizes")->capture_default_str();
  pf->add_option("--M", pa.M, "Subsamples per size")->capture_default_str();
  pf->add_option("--B", pa.B, "Bootstrap replicates")->capture_default_str();
  pf->add_option("--alpha", pa.alpha, "Significance level")->capture_default_str();
  pf->add_option("--tests", pa.tests, "Comma-separated tests")->capture_default_str();
  pf->add_option("--seed", pa.seed, "Master seed")->capture_default_str();
  pf->add_option("--out", pa.out, "Output directory")->capture_default_str();
  add_threads(pf, pa.threads);
  pf->add_option("--config", P.config, "key = value file; flags override it");

  auto* sy = P.synth = app.add_subcommand("synth-returns", "Write a synthetic returns fixture");
  auto& ya = P.synth_args;
  sy->add_option("--T", ya.cfg.T, "Periods")->capture_default_str();
  sy->add_option("--p", ya.cfg.p, "Tickers")->capture_default_str();
  sy->add_option("--autocorrelated", ya.cfg.autocorrelated, "AR(1) tickers")
      ->capture_default_str();
  sy->add_option("--ar-coef", ya.cfg.ar_coef, "AR coefficient")->capture_default_str();
  sy->add_option("--planted", ya.cfg.planted, "Tickers with a nonzero mean")
      ->capture_default_str();
  sy->add_option("--planted-t", ya.cfg.planted_t, "Full-sample t of planted tickers")
      ->capture_default_str();
  sy->add_option("--dense", ya.cfg.dense, "Tickers with a weak mean")->capture_default_str();
  sy->add_option("--dense-t", ya.cfg.dense_t, "Full-sample t of weak tickers")
      ->capture_default_str();
  sy->add_option("--seed", ya.seed, "Master seed")->capture_default_str();
  sy->add_option("--out", ya.out, "Output directory")->capture_default_str();
  sy->add_option("--config", P.config, "key = value file; flags override it");

  auto* rp = P.replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  rp->add_option("manifest", P.replay_args.manifest, "manifest.json")->required();
  rp->add_option("--out", P.replay_args.out, "Write outputs here instead");
}

std::vector<std::string> replay_args(const ReplayArgs& r) {
  std::ifstream f(r.manifest);
  if (!f) throw DataError("cannot open " + r.manifest);
  json m;
  try {
    m = json::parse(f);
  } catch (const json::exception& e) {
    throw DataError(r.manifest + ": " + e.what());
  }
  if (!m.contains("args") || !m["args"].is_array()) {
    throw DataError(r.manifest + ": no recorded args");
  }
  auto args = m["args"].get<std::vector<std::string>>();
  if (args.empty() || args.front() == "replay") throw DataError(r.manifest + ": bad args");
  if (r.out.empty()) return args;
  std::vector<std::string> patched;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto name = option_name(args[i]);
    if (name == "out" || name == "json" || name == "manifest") {
      if (args[i].find('=') == std::string::npos) ++i;  // skip the value too
      continue;
    }
    patched.push_back(args[i]);
  }
  if (args.front() == "test") {
    prepare_out_dir(r.out);
    patched.push_back("--json");
    patched.push_back((fs::path(r.out) / "report.json").string());
    patched.push_back("--manifest");
    patched.push_back((fs::path(r.out) / "manifest.json").string());
  } else {
    patched.push_back("--out");
    patched.push_back(r.out);
  }
  return patched;
}

int dispatch(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err,
             int depth) {
  Parsed P;
  build_parser(P);
  const auto args = inject_config(raw);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("lstat");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    P.app->parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = P.app->exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // Recorded args are the effective ones, with --config already expanded.
  std::vector<std::string> recorded;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto name = option_name(args[i]);
    if (name == "config") {
      if (args[i].find('=') == std::string::npos) ++i;
      continue;
    }
    recorded.push_back(args[i]);
  }

  if (P.test->parsed()) return cmd_test(P.test_args, recorded, out, err);
  if (P.simulate->parsed()) return cmd_simulate(P.sim_args, recorded, out, err);
  if (P.portfolio->parsed()) return cmd_portfolio(P.port_args, recorded, out, err);
  if (P.synth->parsed()) return cmd_synth(P.synth_args, recorded, out, err);
  if (P.replay->parsed()) {
    if (depth > 0) throw DataError("nested replay");
    return dispatch(replay_args(P.replay_args), out, err, depth + 1);
  }
  return kExitUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err, 0);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace ltest::cli
