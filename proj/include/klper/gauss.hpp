#pragma once

// Batch generating policy: a Gaussian fitted to the deviations between stored
// actions and the current actor's actions, scored by its KL divergence to an
// isotropic zero-mean target.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

#include "klper/error.hpp"
#include "klper/numcore/matrix.hpp"
#include "klper/random.hpp"

namespace klper {

inline constexpr double kCovarianceRegularization = 1e-6;

struct BatchPolicy {
  Vector mean;       // length l
  Matrix covariance; // l x l, symmetric

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

/// Target distribution N(0, sigma * I). sigma is the per-dimension variance.
class KlTarget {
public:
  KlTarget(double sigma, std::size_t dim) : sigma_(sigma), dim_(dim) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw ConfigError("KL target sigma must be a positive finite number");
    }
    if (dim == 0) throw ConfigError("KL target dimension must be >= 1");
  }

  double sigma() const { return sigma_; }
  std::size_t dim() const { return dim_; }

private:
  double sigma_;
  std::size_t dim_;
};

/// Column means and 1/(b-1) sample covariance of `deltas` (b x l), with
/// `regularization * I` added to the covariance.
inline BatchPolicy fit_batch_policy(const Matrix& deltas,
                                    double regularization = kCovarianceRegularization) {
  const auto b = deltas.rows();
  if (b < 2) {
    throw NumericalError("fit_batch_policy needs at least 2 samples, got " + std::to_string(b));
  }
  if (deltas.cols() < 1) throw ShapeError("fit_batch_policy: deltas have no columns");
  BatchPolicy p;
  p.mean = deltas.colwise().mean().transpose();
  const Matrix centered = deltas.rowwise() - p.mean.transpose();
  p.covariance = (centered.transpose() * centered) / static_cast<double>(b - 1);
  // Exact symmetry regardless of GEMM blocking.
  p.covariance = 0.5 * (p.covariance + p.covariance.transpose()).eval();
  p.covariance.diagonal().array() += regularization;
  return p;
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
inline Matrix cholesky_lower(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("cholesky_lower: matrix is not square");
  const auto n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NumericalError("covariance is not positive definite (pivot " + std::to_string(j) +
                           ")");
    }
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

inline double log_det_spd(const Matrix& a) {
  const Matrix l = cholesky_lower(a);
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += 2.0 * std::log(l(i, i));
  return s;
}

inline void check_policy_target(const BatchPolicy& policy, const KlTarget& target) {
  if (policy.dim() != target.dim() ||
      static_cast<std::size_t>(policy.covariance.rows()) != policy.dim() ||
      static_cast<std::size_t>(policy.covariance.cols()) != policy.dim()) {
    throw ShapeError("batch policy of dimension " + std::to_string(policy.dim()) +
                     " does not match KL target dimension " + std::to_string(target.dim()));
  }
}

/// KL( N(mean, cov) || N(0, sigma I) ) in closed form.
inline double kl_to_isotropic(const BatchPolicy& policy, const KlTarget& target) {
  check_policy_target(policy, target);
  const double l = static_cast<double>(target.dim());
  const double sigma = target.sigma();
  const double log_det = log_det_spd(policy.covariance);
  const double trace = policy.covariance.trace();
  const double mean_sq = policy.mean.squaredNorm();
  return 0.5 * ((trace + mean_sq) / sigma - l + l * std::log(sigma) - log_det);
}

struct MonteCarloEstimate {
  double estimate;
  double std_error;
};

namespace detail {

// Inverse and log|det| by Gaussian elimination with partial pivoting. Kept
// separate from the Cholesky route so the Monte-Carlo estimate does not share
// the closed form's determinant computation.
inline std::pair<Matrix, double> lu_inverse_logdet(const Matrix& a) {
  const auto n = a.rows();
  Matrix m = a;
  Matrix inv = Matrix::Identity(n, n);
  double log_det = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    }
    if (m(piv, c) == 0.0) throw NumericalError("singular covariance");
    if (piv != c) {
      m.row(piv).swap(m.row(c));
      inv.row(piv).swap(inv.row(c));
    }
    const double p = m(c, c);
    log_det += std::log(std::abs(p));
    m.row(c) /= p;
    inv.row(c) /= p;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m(r, c);
      if (f == 0.0) continue;
      m.row(r) -= f * m.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return {inv, log_det};
}

} // namespace detail

/// Monte-Carlo estimate of E_{x ~ policy}[ln p_policy(x) - ln p_target(x)]
/// with its standard error.
inline MonteCarloEstimate kl_monte_carlo_oracle(const BatchPolicy& policy, const KlTarget& target,
                                                std::size_t n, std::uint64_t seed) {
  check_policy_target(policy, target);
  if (n < 10000) throw ConfigError("kl_monte_carlo_oracle needs n >= 10^4 samples");
  const auto l = static_cast<Eigen::Index>(policy.dim());
  const Matrix chol = cholesky_lower(policy.covariance);
  const auto [inv, log_det] = detail::lu_inverse_logdet(policy.covariance);
  const double sigma = target.sigma();
  const double log_sigma = std::log(sigma);

  Rng rng(seed);
  Vector z(l), x(l), d(l);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < l; ++k) z[k] = standard_normal(rng);
    x = policy.mean + chol * z;
    d = x - policy.mean;
    const double maha = d.dot(inv * d);
    // Normalizing constants (2 pi)^{-l/2} cancel.
    const double log_p = -0.5 * (log_det + maha);
    const double log_q = -0.5 * (static_cast<double>(l) * log_sigma + x.squaredNorm() / sigma);
    const double r = log_p - log_q;
    const double delta = r - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (r - mean);
  }
  const double var = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

} // namespace klper
