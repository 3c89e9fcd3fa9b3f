#pragma once

// Gaussian-mixture prior over R^d: exact log-density, score, Hessian,
// sampling, and the closed-form forward-diffused marginal.

#include "genrestore/random.hpp"
#include "genrestore/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace genrestore {

inline constexpr double kDefaultCovarianceFloor = 1e-6;
inline constexpr double kWeightSumTolerance = 1e-12;
inline constexpr double kSymmetryTolerance = 1e-12;

struct GaussianComponent {
  double weight = 0.0;
  Vector mean;
  Matrix cov;
};

/// Immutable after construction. The constructor validates every invariant
/// and caches a Cholesky factor, precision matrix and log-normalizer per
/// component; all read operations are const and thread-safe.
class MixturePrior {
public:
  explicit MixturePrior(std::vector<GaussianComponent> components,
                        double covariance_floor = kDefaultCovarianceFloor)
      : components_(std::move(components)), floor_(covariance_floor) {
    validate_and_factor();
  }

  [[nodiscard]] Index dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return components_.size(); }
  [[nodiscard]] double covariance_floor() const noexcept { return floor_; }

  [[nodiscard]] const std::vector<GaussianComponent> &components() const noexcept {
    return components_;
  }
  [[nodiscard]] const GaussianComponent &component(std::size_t i) const { return components_.at(i); }

  /// Lower-triangular L with L L^T = cov_i.
  [[nodiscard]] const Matrix &cholesky(std::size_t i) const { return chol_.at(i); }
  [[nodiscard]] const Matrix &precision(std::size_t i) const { return precision_.at(i); }
  /// log w_i - 0.5 log det cov_i - (d/2) log(2 pi); -inf for zero weight.
  [[nodiscard]] double log_normalizer(std::size_t i) const { return log_norm_.at(i); }

private:
  void validate_and_factor() {
    if (components_.empty()) throw ValidationError("components: mixture must have at least one component");
    if (!(floor_ > 0.0)) throw ValidationError("covariance_floor: must be positive");
    dim_ = components_.front().mean.size();
    if (dim_ < 1) throw ValidationError("components[0].mean: dimension must be positive");

    double weight_sum = 0.0;
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < components_.size(); ++i) {
      const auto &c = components_[i];
      const std::string path = "components[" + std::to_string(i) + "]";
      if (!std::isfinite(c.weight) || c.weight < 0.0 || c.weight > 1.0) {
        throw ValidationError(path + ".weight: must be a probability in [0,1]");
      }
      if (c.mean.size() != dim_) {
        throw ValidationError(path + ".mean: expected length " + std::to_string(dim_) + ", got " +
                              std::to_string(c.mean.size()));
      }
      if (c.cov.rows() != dim_ || c.cov.cols() != dim_) {
        throw ValidationError(path + ".cov: expected " + std::to_string(dim_) + "x" +
                              std::to_string(dim_) + " matrix");
      }
      if (!c.mean.allFinite()) throw ValidationError(path + ".mean: non-finite entry");
      if (!c.cov.allFinite()) throw ValidationError(path + ".cov: non-finite entry");
      if ((c.cov - c.cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
        throw ValidationError(path + ".cov: not symmetric within 1e-12");
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(c.cov, Eigen::EigenvaluesOnly);
      const double lo = eig.eigenvalues().minCoeff();
      const double hi = eig.eigenvalues().maxCoeff();
      // Eigen-clamped reconstructions land within rounding of the floor.
      if (lo < floor_ - 1e-12 * std::max(1.0, std::abs(hi))) {
        throw ValidationError(path + ".cov: smallest eigenvalue " + std::to_string(lo) +
                              " below covariance floor " + std::to_string(floor_));
      }
      Eigen::LLT<Matrix> llt(c.cov);
      if (llt.info() != Eigen::Success) {
        throw NumericalError(path + ".cov: Cholesky factorization failed for component " +
                             std::to_string(i));
      }
      Matrix L = llt.matrixL();
      Matrix Linv = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(dim_, dim_));
      Matrix P = Linv.transpose() * Linv;
      P = 0.5 * (P + P.transpose()).eval();
      const double log_det = 2.0 * L.diagonal().array().log().sum();
      log_norm_.push_back((c.weight > 0.0 ? std::log(c.weight) : -std::numeric_limits<double>::infinity()) -
                          0.5 * log_det - 0.5 * static_cast<double>(dim_) * log_2pi);
      chol_.push_back(std::move(L));
      precision_.push_back(std::move(P));
      weight_sum += c.weight;
    }
    if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
      throw ValidationError("components: weights sum to " + std::to_string(weight_sum) +
                            ", expected 1 within 1e-12");
    }
  }

  std::vector<GaussianComponent> components_;
  double floor_;
  Index dim_ = 0;
  std::vector<Matrix> chol_;
  std::vector<Matrix> precision_;
  std::vector<double> log_norm_;
};

namespace detail {

inline double log_sum_exp(const Vector &v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

/// log_terms[i] = log w_i + log N(x; mu_i, cov_i). When `grads` is non-null its
/// column i receives cov_i^{-1} (mu_i - x).
inline void component_terms(const MixturePrior &prior, const Eigen::Ref<const Vector> &x,
                            Vector &log_terms, Matrix *grads) {
  const Index d = prior.dim();
  const auto k = static_cast<Index>(prior.size());
  log_terms.resize(k);
  if (grads != nullptr) grads->resize(d, k);
  thread_local Vector z;
  z.resize(d);
  for (Index i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Matrix &L = prior.cholesky(idx);
    z.noalias() = x - prior.component(idx).mean;
    L.triangularView<Eigen::Lower>().solveInPlace(z);
    log_terms[i] = prior.log_normalizer(idx) - 0.5 * z.squaredNorm();
    if (grads != nullptr) {
      L.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
      grads->col(i) = -z;
    }
  }
}

inline Vector responsibilities_from(const Vector &log_terms) {
  const double lse = log_sum_exp(log_terms);
  return (log_terms.array() - lse).exp().matrix();
}

/// Scratch buffers reused by the per-point evaluations on each thread.
struct Workspace {
  Vector terms;
  Matrix grads;
};

inline Workspace &workspace() {
  thread_local Workspace ws;
  return ws;
}

} // namespace detail

inline double log_density(const MixturePrior &prior, const Eigen::Ref<const Vector> &x) {
  require_dim(prior.dim(), x.size(), "log_density");
  auto &ws = detail::workspace();
  detail::component_terms(prior, x, ws.terms, nullptr);
  return detail::log_sum_exp(ws.terms);
}

/// Component posterior probabilities r_i(x).
inline Vector responsibilities(const MixturePrior &prior, const Eigen::Ref<const Vector> &x) {
  require_dim(prior.dim(), x.size(), "responsibilities");
  auto &ws = detail::workspace();
  detail::component_terms(prior, x, ws.terms, nullptr);
  return detail::responsibilities_from(ws.terms);
}

/// grad_x log p(x) = sum_i r_i(x) cov_i^{-1} (mu_i - x).
inline Vector score(const MixturePrior &prior, const Eigen::Ref<const Vector> &x) {
  require_dim(prior.dim(), x.size(), "score");
  auto &ws = detail::workspace();
  detail::component_terms(prior, x, ws.terms, &ws.grads);
  const double lse = detail::log_sum_exp(ws.terms);
  ws.terms = (ws.terms.array() - lse).exp().matrix();
  return ws.grads * ws.terms;
}

/// Exact Hessian of log p:
///   sum_i r_i (g_i g_i^T - P_i) - s s^T,  g_i = P_i (mu_i - x), s = sum_i r_i g_i.
inline Matrix hessian_log_density(const MixturePrior &prior, const Eigen::Ref<const Vector> &x) {
  require_dim(prior.dim(), x.size(), "hessian_log_density");
  Vector terms;
  Matrix grads;
  detail::component_terms(prior, x, terms, &grads);
  const Vector r = detail::responsibilities_from(terms);
  const Vector s = grads * r;
  Matrix H = -s * s.transpose();
  for (Index i = 0; i < r.size(); ++i) {
    if (r[i] == 0.0) continue;
    const auto idx = static_cast<std::size_t>(i);
    H.noalias() += r[i] * (grads.col(i) * grads.col(i).transpose() - prior.precision(idx));
  }
  return 0.5 * (H + H.transpose());
}

/// Index drawn from a discrete distribution given by non-negative `probs`.
inline std::size_t sample_categorical(const Eigen::Ref<const Vector> &probs, RandomStream &rng) {
  const double u = rng.uniform() * probs.sum();
  double acc = 0.0;
  Index last_positive = 0;
  for (Index i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    acc += probs[i];
    if (u < acc) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(last_positive);
}

/// count x d matrix of i.i.d. draws, one per row.
inline Matrix sample(const MixturePrior &prior, Index count, RandomStream &rng) {
  if (count < 1) throw ValidationError("sample: count must be >= 1");
  const Index d = prior.dim();
  Vector weights(static_cast<Index>(prior.size()));
  for (std::size_t i = 0; i < prior.size(); ++i) weights[static_cast<Index>(i)] = prior.component(i).weight;
  Matrix out(count, d);
  Vector z(d);
  for (Index n = 0; n < count; ++n) {
    const std::size_t c = sample_categorical(weights, rng);
    rng.fill_normal(z);
    out.row(n) = (prior.component(c).mean + prior.cholesky(c) * z).transpose();
  }
  return out;
}

/// Exact marginal of sqrt(a) x0 + sqrt(1-a) eps for x0 ~ prior.
inline MixturePrior diffuse(const MixturePrior &prior, double alpha_bar) {
  if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0)) {
    throw ValidationError("diffuse: alpha_bar must lie in [0,1], got " + std::to_string(alpha_bar));
  }
  const double scale = std::sqrt(alpha_bar);
  std::vector<GaussianComponent> out;
  out.reserve(prior.size());
  for (const auto &c : prior.components()) {
    GaussianComponent m;
    m.weight = c.weight;
    m.mean = scale * c.mean;
    m.cov = alpha_bar * c.cov;
    m.cov.diagonal().array() += (1.0 - alpha_bar);
    out.push_back(std::move(m));
  }
  return MixturePrior(std::move(out), prior.covariance_floor());
}

} // namespace genrestore
