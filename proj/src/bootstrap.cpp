#include "lstat/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lstat/error.hpp"
#include "lstat/parallel.hpp"

namespace ltest {

namespace {

// Replicates are evaluated in fixed-size blocks so that the matrix products,
// and hence every floating-point result, are identical for any worker count.
constexpr std::size_t kBlock = 32;

}  // namespace

BootstrapDistribution::BootstrapDistribution(KGrid grid, Matrix replicates, Matrix power_sums,
                                             std::uint64_t seed)
    : grid_(std::move(grid)),
      replicates_(std::move(replicates)),
      power_sums_(std::move(power_sums)),
      seed_(seed) {
  if (static_cast<std::size_t>(replicates_.cols()) != grid_.size()) {
    throw DomainError("bootstrap replicates do not match the k-grid");
  }
  const auto b = static_cast<double>(replicates_.rows());
  mean_ = replicates_.colwise().mean().transpose();
  var_.resize(replicates_.cols());
  for (Eigen::Index j = 0; j < replicates_.cols(); ++j) {
    var_[j] = b > 1 ? (replicates_.col(j).array() - mean_[j]).square().sum() / (b - 1.0) : 0.0;
  }
}

std::size_t BootstrapDistribution::slot(std::size_t k) const {
  const auto j = grid_.index_of(k);
  if (!j) throw DomainError("k = " + std::to_string(k) + " is not in the bootstrap grid");
  return *j;
}

std::span<const double> BootstrapDistribution::column(std::size_t k) const {
  const auto j = static_cast<Eigen::Index>(slot(k));
  return {replicates_.col(j).data(), B()};
}

double BootstrapDistribution::mean(std::size_t k) const {
  return mean_[static_cast<Eigen::Index>(slot(k))];
}

double BootstrapDistribution::variance(std::size_t k) const {
  return var_[static_cast<Eigen::Index>(slot(k))];
}

BootstrapDistribution wild_bootstrap(const SampleMatrix& x, const KGrid& grid, std::size_t B,
                                     const RngStream& stream, unsigned threads) {
  if (B < 2) throw DomainError("wild_bootstrap needs B >= 2");
  if (grid.p() != x.p()) throw DomainError("k-grid dimension does not match the data");

  const auto n = static_cast<Eigen::Index>(x.n());
  const auto p = static_cast<Eigen::Index>(x.p());
  const double nd = static_cast<double>(n);

  const Matrix centered = x.data().rowwise() - x.moments().means.transpose();
  // Sign flips leave squares unchanged, so each replicate's variance only
  // needs its own mean: var* = (ss - n m*^2) / (n - 1).
  const Vector ss = centered.colwise().squaredNorm().transpose();

  Matrix replicates(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(grid.size()));
  Matrix power_sums(static_cast<Eigen::Index>(B),
                    static_cast<Eigen::Index>(kPowerSumOrders.size()));
  const std::size_t blocks = (B + kBlock - 1) / kBlock;

  parallel_for(blocks, threads, [&](std::size_t block) {
    const std::size_t first = block * kBlock;
    const auto rows = static_cast<Eigen::Index>(std::min(kBlock, B - first));
    Matrix signs(rows, n);
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < rows; ++r) {
      RngStream rs = stream.derive(first + static_cast<std::size_t>(r));
      fill_rademacher(rs, row);
      signs.row(r) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), n);
    }
    const Matrix means = (signs * centered) / nd;

    std::vector<double> sq(static_cast<std::size_t>(p));
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto out = static_cast<Eigen::Index>(first) + r;
      double l2 = 0.0, l4 = 0.0, l6 = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double m = means(r, j);
        const double m2 = m * m;
        const double var = (ss[j] - nd * m2) / (nd - 1.0);
        if (!(var > 0.0)) {
          throw NumericalError("degenerate bootstrap replicate: zero column variance");
        }
        sq[static_cast<std::size_t>(j)] = nd * m2 / var;
        l2 += m2;
        l4 += m2 * m2;
        l6 += m2 * m2 * m2;
      }
      power_sums(out, 0) = l2;
      power_sums(out, 1) = l4;
      power_sums(out, 2) = l6;

      std::sort(sq.begin(), sq.end(), std::greater<>());
      std::size_t g = 0;
      double acc = 0.0;
      for (std::size_t i = 0; i < sq.size() && g < grid.size(); ++i) {
        acc += sq[i];
        if (i + 1 == grid[g]) replicates(out, static_cast<Eigen::Index>(g++)) = acc;
      }
    }
  });

  return BootstrapDistribution(grid, std::move(replicates), std::move(power_sums), stream.seed());
}

Probability p_value_empirical(double observed, std::span<const double> replicates) {
  const auto exceed = std::count_if(replicates.begin(), replicates.end(),
                                    [observed](double v) { return v >= observed; });
  return Probability(static_cast<double>(1 + exceed) /
                     static_cast<double>(replicates.size() + 1));
}

Probability p_value_fixed_k(double observed, const BootstrapDistribution& dist, std::size_t k) {
  return p_value_empirical(observed, dist.column(k));
}

Probability p_value_diverging_k(double observed, const BootstrapDistribution& dist,
                                std::size_t k) {
  if (dist.B() < 20) throw NumericalError("normal calibration needs B >= 20");
  const double var = dist.variance(k);
  if (!(var > 0.0)) {
    throw NumericalError("bootstrap variance of T_" + std::to_string(k) + " is not positive");
  }
  return norm_sf((observed - dist.mean(k)) / std::sqrt(var));
}

}  // namespace ltest
