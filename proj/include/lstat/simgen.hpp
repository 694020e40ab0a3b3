#pragma once

// Synthetic designs X_i = mu + Sigma^{1/2} eps_i with AR(1) covariance
// Sigma_ij = rho^|i-j| and standardized innovations.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "lstat/core.hpp"
#include "lstat/numstat.hpp"

namespace ltest {

enum class Innovation { Normal, T3, MixNormal };

std::string_view to_string(Innovation innovation) noexcept;
Innovation parse_innovation(std::string_view name);

struct SimConfig {
  std::size_t n = 100;
  std::size_t p = 100;
  double rho = 0.5;
  Innovation innovation = Innovation::Normal;
  std::size_t s = 0;               // number of nonzero means
  std::optional<double> kappa;     // signal size; default_kappa() when empty
  std::uint64_t seed = 1;

  /// 3 sqrt(log p / (n s)); zero when s == 0.
  double default_kappa() const noexcept;
  double signal() const noexcept { return kappa.value_or(default_kappa()); }
  /// Throws DomainError when a field is out of range.
  void validate() const;
};

/// Symmetric square root of the AR(1) correlation matrix.
struct CovFactor {
  std::size_t p = 0;
  Matrix factor;
};

CovFactor ar1_sqrt(std::size_t p, double rho);

/// n x p matrix of iid mean-zero, unit-variance innovations.
Matrix draw_innovations(const SimConfig& cfg, RngStream& stream);

/// First s entries equal cfg.signal(), the rest zero.
Vector make_mu(const SimConfig& cfg);

SampleMatrix generate(const SimConfig& cfg, const CovFactor& factor, RngStream& stream);
SampleMatrix generate(const SimConfig& cfg, RngStream& stream);

}  // namespace ltest
