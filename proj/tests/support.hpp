#pragma once
// Shared helpers for the test binaries: reference distributions and fixtures
// built without the library's own samplers.
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lstat/core.hpp"

namespace ltest::testing {

/// sup_x |F_n(x) - F(x)| for the sample against a continuous CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

/// KS distance to Uniform(0, 1).
double ks_uniform(std::vector<double> sample);

/// KS distance to the normal law with the sample's own mean and sd.
double ks_normal_shape(std::vector<double> sample);

double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);
double correlation(const std::vector<double>& a, const std::vector<double>& b);

/// n x p iid N(0, 1) from std::mt19937_64.
Matrix iid_normal(std::size_t n, std::size_t p, std::uint64_t seed);

/// The s largest of p iid chi^2_1 draws, in decreasing order. Exact sampler:
/// the s smallest of p uniforms by sequential order statistics, mapped
/// through the chi^2_1 upper-tail quantile 2 erfc^{-1}(u)^2.
std::vector<double> top_chi2(std::size_t p, std::size_t s, std::mt19937_64& gen);

/// Fresh empty directory under the system temp dir.
std::filesystem::path fresh_dir(const std::string& tag);

std::string slurp(const std::filesystem::path& path);

}  // namespace ltest::testing
