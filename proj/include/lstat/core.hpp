#pragma once

// Data model, per-variable t-statistics and the L-statistic panel
// T_k = sum of the k largest squared t-statistics, for every k at once.

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

namespace ltest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ColumnMoments {
  Vector means;
  Vector variances;  // unbiased, divisor n - 1
};

/// Two-pass column means and variances. Throws DataError naming the first
/// column whose variance is not strictly positive.
ColumnMoments column_moments(const Eigen::Ref<const Matrix>& x);

/// An n x p observation matrix (rows are observations, columns variables).
/// Immutable once built; the column moments are computed and checked at
/// construction.
class SampleMatrix {
 public:
  static constexpr std::size_t kMinRows = 4;

  explicit SampleMatrix(Matrix data);

  std::size_t n() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  const Matrix& data() const noexcept { return data_; }
  const ColumnMoments& moments() const noexcept { return moments_; }

 private:
  Matrix data_;
  ColumnMoments moments_;
};

inline const ColumnMoments& column_moments(const SampleMatrix& x) { return x.moments(); }

struct TStatPanel {
  std::vector<double> t;          // per-variable t statistics
  std::vector<double> sorted_sq;  // t^2 in non-increasing order
  std::vector<double> prefix;     // prefix[k-1] = T_k

  std::size_t p() const noexcept { return t.size(); }
};

/// Builds the panel from already-computed t statistics.
TStatPanel make_panel(std::vector<double> t);

TStatPanel t_statistics(const SampleMatrix& x);

/// T_k for 1 <= k <= p; throws DomainError otherwise.
double l_statistic(const TStatPanel& panel, std::size_t k);

/// Strictly increasing set of L-statistic orders in [1, p].
class KGrid {
 public:
  KGrid(std::vector<std::size_t> ks, std::size_t p);

  const std::vector<std::size_t>& ks() const noexcept { return ks_; }
  std::size_t size() const noexcept { return ks_.size(); }
  std::size_t p() const noexcept { return p_; }
  std::size_t operator[](std::size_t j) const noexcept { return ks_[j]; }

  bool contains(std::size_t k) const noexcept;
  std::optional<std::size_t> index_of(std::size_t k) const noexcept;

  /// Sorted union of this grid and `extra` (orders must lie in [1, p]).
  KGrid with(const std::vector<std::size_t>& extra) const;

 private:
  std::vector<std::size_t> ks_;
  std::size_t p_;
};

/// Builds an increasing grid from arbitrary orders (duplicates removed).
KGrid make_k_grid(std::vector<std::size_t> ks, std::size_t p);

/// {5} together with ceil(p / 2^i) for i = 1..K, K = floor(log(p/20) / log 2).
/// Requires p >= 40.
KGrid default_k_grid(std::size_t p);

/// Number of halvings K used by default_k_grid.
std::size_t default_k_halvings(std::size_t p);

}  // namespace ltest
