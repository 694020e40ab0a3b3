#include "lstat/simgen.hpp"

#include <cmath>
#include <random>
#include <string>

#include "lstat/error.hpp"

namespace ltest {

std::string_view to_string(Innovation innovation) noexcept {
  switch (innovation) {
    case Innovation::Normal: return "normal";
    case Innovation::T3: return "t3";
    case Innovation::MixNormal: return "mixnormal";
  }
  return "normal";
}

Innovation parse_innovation(std::string_view name) {
  if (name == "normal") return Innovation::Normal;
  if (name == "t3") return Innovation::T3;
  if (name == "mixnormal" || name == "mixture") return Innovation::MixNormal;
  throw DomainError("unknown innovation law '" + std::string(name) +
                    "' (expected normal, t3 or mixnormal)");
}

double SimConfig::default_kappa() const noexcept {
  if (s == 0) return 0.0;
  return 3.0 * std::sqrt(std::log(static_cast<double>(p)) /
                         (static_cast<double>(n) * static_cast<double>(s)));
}

void SimConfig::validate() const {
  if (n < SampleMatrix::kMinRows) throw DomainError("n must be at least 4");
  if (p < 1) throw DomainError("p must be at least 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0, 1)");
  if (s > p) throw DomainError("sparsity s cannot exceed p");
  if (kappa && !(*kappa >= 0.0)) throw DomainError("kappa must be non-negative");
}

CovFactor ar1_sqrt(std::size_t p, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("ar1_sqrt: rho must lie in [0, 1)");
  const auto dim = static_cast<Eigen::Index>(p);
  Matrix sigma(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      sigma(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericalError("ar1_sqrt: eigendecomposition failed");
  const Vector& values = eig.eigenvalues();
  if (!(values.minCoeff() > 0.0)) throw NumericalError("ar1_sqrt: covariance is not positive definite");
  const Matrix& vecs = eig.eigenvectors();
  Matrix root = vecs * values.cwiseSqrt().asDiagonal() * vecs.transpose();
  CovFactor f;
  f.p = p;
  f.factor = 0.5 * (root + root.transpose());
  return f;
}

Matrix draw_innovations(const SimConfig& cfg, RngStream& stream) {
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto p = static_cast<Eigen::Index>(cfg.p);
  Matrix eps(n, p);
  std::normal_distribution<double> normal;
  switch (cfg.innovation) {
    case Innovation::Normal:
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) eps(i, j) = normal(stream);
      break;
    case Innovation::T3: {
      // t(3) = Z / sqrt(chi2_3 / 3); dividing by sqrt(3) gives unit variance.
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
          const double z = normal(stream);
          const double a = normal(stream), b = normal(stream), c = normal(stream);
          const double chi = a * a + b * b + c * c;
          eps(i, j) = z / std::sqrt(chi / 3.0) / std::sqrt(3.0);
        }
      }
      break;
    }
    case Innovation::MixNormal: {
      const double scale = 1.0 / std::sqrt(1.8);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
          const bool wide = stream.uniform() < 0.1;
          const double z = normal(stream);
          eps(i, j) = (wide ? 3.0 * z : z) * scale;
        }
      }
      break;
    }
  }
  return eps;
}

Vector make_mu(const SimConfig& cfg) {
  cfg.validate();
  Vector mu = Vector::Zero(static_cast<Eigen::Index>(cfg.p));
  mu.head(static_cast<Eigen::Index>(cfg.s)).setConstant(cfg.signal());
  return mu;
}

SampleMatrix generate(const SimConfig& cfg, const CovFactor& factor, RngStream& stream) {
  cfg.validate();
  if (factor.p != cfg.p) throw DomainError("covariance factor dimension does not match p");
  Matrix x = draw_innovations(cfg, stream);
  if (cfg.rho != 0.0) x = x * factor.factor;  // factor is symmetric: rows become factor * eps_i
  if (cfg.s > 0) x.rowwise() += make_mu(cfg).transpose();
  return SampleMatrix(std::move(x));
}

SampleMatrix generate(const SimConfig& cfg, RngStream& stream) {
  return generate(cfg, ar1_sqrt(cfg.p, cfg.rho), stream);
}

}  // namespace ltest
