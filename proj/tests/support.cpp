#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

namespace ltest::testing {

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_uniform(std::vector<double> sample) {
  return ks_distance(std::move(sample), [](double u) { return std::clamp(u, 0.0, 1.0); });
}

double ks_normal_shape(std::vector<double> sample) {
  const double m = mean(sample);
  const double s = sample_sd(sample);
  return ks_distance(std::move(sample),
                     [&](double x) { return 0.5 * std::erfc(-(x - m) / (s * std::sqrt(2.0))); });
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Matrix iid_normal(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = z(gen);
  return x;
}

std::vector<double> top_chi2(std::size_t p, std::size_t s, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out;
  double u = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    double v = unif(gen);
    while (v == 0.0) v = unif(gen);
    // next smallest of the remaining p - i uniforms on (u, 1)
    u += (1.0 - u) * -std::expm1(std::log(v) / static_cast<double>(p - i));
    const double e = boost::math::erfc_inv(u);
    out.push_back(2.0 * e * e);
  }
  return out;
}

std::filesystem::path fresh_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("lstat_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace ltest::testing
