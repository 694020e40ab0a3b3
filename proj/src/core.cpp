#include "lstat/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "lstat/error.hpp"

namespace ltest {

ColumnMoments column_moments(const Eigen::Ref<const Matrix>& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw DataError("column moments need at least two rows");
  ColumnMoments m{Vector(x.cols()), Vector(x.cols())};
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto col = x.col(j);
    const double mean = col.sum() / static_cast<double>(n);
    const double ss = (col.array() - mean).square().sum();
    const double var = ss / static_cast<double>(n - 1);
    if (!(var > 0.0)) {
      throw DataError("degenerate column " + std::to_string(j) + ": zero sample variance");
    }
    m.means[j] = mean;
    m.variances[j] = var;
  }
  return m;
}

SampleMatrix::SampleMatrix(Matrix data) : data_(std::move(data)) {
  if (n() < kMinRows) {
    throw DataError("sample matrix needs at least " + std::to_string(kMinRows) + " rows, got " +
                    std::to_string(n()));
  }
  if (p() < 1) throw DataError("sample matrix needs at least one column");
  if (!data_.allFinite()) throw DataError("sample matrix contains non-finite entries");
  moments_ = column_moments(data_);
}

TStatPanel make_panel(std::vector<double> t) {
  TStatPanel panel;
  panel.t = std::move(t);
  panel.sorted_sq.resize(panel.t.size());
  std::transform(panel.t.begin(), panel.t.end(), panel.sorted_sq.begin(),
                 [](double v) { return v * v; });
  std::sort(panel.sorted_sq.begin(), panel.sorted_sq.end(), std::greater<>());
  panel.prefix.resize(panel.sorted_sq.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < panel.sorted_sq.size(); ++i) {
    acc += panel.sorted_sq[i];
    panel.prefix[i] = acc;
  }
  return panel;
}

TStatPanel t_statistics(const SampleMatrix& x) {
  const auto& m = x.moments();
  const double root_n = std::sqrt(static_cast<double>(x.n()));
  std::vector<double> t(x.p());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    t[i] = root_n * m.means[j] / std::sqrt(m.variances[j]);
  }
  return make_panel(std::move(t));
}

double l_statistic(const TStatPanel& panel, std::size_t k) {
  if (k < 1 || k > panel.p()) {
    throw DomainError("L-statistic order " + std::to_string(k) + " outside [1, " +
                      std::to_string(panel.p()) + "]");
  }
  return panel.prefix[k - 1];
}

KGrid::KGrid(std::vector<std::size_t> ks, std::size_t p) : ks_(std::move(ks)), p_(p) {
  if (ks_.empty()) throw DomainError("k-grid is empty");
  if (ks_.front() < 1 || ks_.back() > p_) throw DomainError("k-grid entries must lie in [1, p]");
  for (std::size_t j = 1; j < ks_.size(); ++j) {
    if (ks_[j] <= ks_[j - 1]) throw DomainError("k-grid must be strictly increasing");
  }
}

bool KGrid::contains(std::size_t k) const noexcept { return index_of(k).has_value(); }

std::optional<std::size_t> KGrid::index_of(std::size_t k) const noexcept {
  const auto it = std::lower_bound(ks_.begin(), ks_.end(), k);
  if (it == ks_.end() || *it != k) return std::nullopt;
  return static_cast<std::size_t>(it - ks_.begin());
}

KGrid KGrid::with(const std::vector<std::size_t>& extra) const {
  std::vector<std::size_t> all = ks_;
  all.insert(all.end(), extra.begin(), extra.end());
  return make_k_grid(std::move(all), p_);
}

KGrid make_k_grid(std::vector<std::size_t> ks, std::size_t p) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return KGrid(std::move(ks), p);
}

std::size_t default_k_halvings(std::size_t p) {
  if (p < 40) {
    throw DomainError("default k-grid needs p >= 40 (got " + std::to_string(p) +
                      "); supply an explicit grid");
  }
  // floor(log2(p / 20)) in exact integer arithmetic: largest K with 20 * 2^K <= p.
  std::size_t halvings = 0;
  while ((std::size_t{20} << (halvings + 1)) <= p) ++halvings;
  return halvings;
}

KGrid default_k_grid(std::size_t p) {
  const std::size_t halvings = default_k_halvings(p);
  std::vector<std::size_t> ks{5};
  std::size_t denom = 1;
  for (std::size_t i = 1; i <= halvings; ++i) {
    denom *= 2;
    ks.push_back((p + denom - 1) / denom);
  }
  return make_k_grid(std::move(ks), p);
}

}  // namespace ltest
