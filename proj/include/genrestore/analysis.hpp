#pragma once

// Closed-form noising diagnostics, evaluation metrics and the synthetic
// degradation operators used by the evaluation harness. Restoration code
// never reads a DegradationOp.

#include "genrestore/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

namespace genrestore {

/// KL( N(sqrt(ab) x0, (1-ab) I) || N(sqrt(ab) y0, (1-ab) I) ) = ab / (2 (1-ab)) |x0 - y0|^2.
inline double kl_noisy(const Eigen::Ref<const Vector> &x0, const Eigen::Ref<const Vector> &y0,
                       const NoiseSchedule &schedule, int t) {
  schedule.require_step(t, "kl_noisy");
  require_dim(x0.size(), y0.size(), "kl_noisy");
  const double ab = schedule.alpha_bar(t);
  if (ab >= 1.0) throw ValidationError("kl_noisy: alpha_bar_t = 1 makes the divergence undefined");
  return ab / (2.0 * (1.0 - ab)) * (x0 - y0).squaredNorm();
}

/// Differential entropy of q(x_t | x0) in d dimensions: d (0.5 log(2 pi (1-ab)) + 0.5).
inline double entropy_forward(const NoiseSchedule &schedule, int t, Index d) {
  schedule.require_step(t, "entropy_forward");
  if (d < 1) throw ValidationError("entropy_forward: d must be positive");
  const double ab = schedule.alpha_bar(t);
  return static_cast<double>(d) * (0.5 * std::log(2.0 * std::numbers::pi * (1.0 - ab)) + 0.5);
}

struct GaussianFit {
  Vector mean;
  Matrix cov;
};

/// Row mean and unbiased (N-1) covariance.
inline GaussianFit fit_gaussian(const Matrix &rows) {
  if (rows.rows() < 2) throw ValidationError("fit_gaussian: need at least 2 rows");
  GaussianFit fit;
  fit.mean = rows.colwise().mean().transpose();
  const Matrix centered = rows.rowwise() - fit.mean.transpose();
  fit.cov = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
  return fit;
}

namespace detail {

inline Matrix psd_sqrt(const Matrix &m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("matrix square root: eigendecomposition failed");
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace detail

inline constexpr double kFrechetRegularization = 1e-10;

/// |mu1 - mu2|^2 + tr(S1 + S2 - 2 (S1 S2)^{1/2}) between Gaussian fits of two row sets.
/// tr (S1 S2)^{1/2} is evaluated as tr (A S2 A)^{1/2} with A = S1^{1/2}, which has the
/// same eigenvalues and stays symmetric.
inline double frechet_distance(const Matrix &set_a, const Matrix &set_b) {
  if (set_a.rows() < 2 || set_b.rows() < 2) throw ValidationError("frechet_distance: each set needs >= 2 rows");
  require_dim(set_a.cols(), set_b.cols(), "frechet_distance");
  if (!set_a.allFinite() || !set_b.allFinite()) throw ValidationError("frechet_distance: non-finite entries");
  GaussianFit a = fit_gaussian(set_a);
  GaussianFit b = fit_gaussian(set_b);
  a.cov.diagonal().array() += kFrechetRegularization;
  b.cov.diagonal().array() += kFrechetRegularization;
  const Matrix root_a = detail::psd_sqrt(a.cov);
  const Matrix inner = root_a * b.cov * root_a;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
  const double cross = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double value = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * cross;
  return std::max(0.0, value);
}

/// Fixed random linear feature map R^d -> R^{min(d,16)}, drawn once from a seed.
class FeatureMap {
public:
  FeatureMap(Index d, std::uint64_t seed) {
    if (d < 1) throw ValidationError("FeatureMap: d must be positive");
    RandomStream rng(seed);
    weights_.resize(std::min<Index>(d, 16), d);
    for (Index i = 0; i < weights_.rows(); ++i) {
      for (Index j = 0; j < d; ++j) weights_(i, j) = rng.normal();
    }
  }

  [[nodiscard]] Vector operator()(const Eigen::Ref<const Vector> &x) const {
    require_dim(weights_.cols(), x.size(), "FeatureMap");
    return weights_ * x;
  }

  [[nodiscard]] const Matrix &weights() const noexcept { return weights_; }

private:
  Matrix weights_;
};

/// Cosine similarity, defined as 0 when either vector is zero.
inline double cosine_similarity(const Vector &a, const Vector &b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

/// max over anchor rows of cos(phi(x), phi(anchor)).
inline double identity_score(const Eigen::Ref<const Vector> &x, const Matrix &anchors, const FeatureMap &phi) {
  if (anchors.rows() < 1) throw ValidationError("identity_score: anchor album is empty");
  const Vector fx = phi(x);
  double best = -1.0;
  for (Index n = 0; n < anchors.rows(); ++n) {
    best = std::max(best, cosine_similarity(fx, phi(anchors.row(n).transpose())));
  }
  return best;
}

inline double identity_score(const Eigen::Ref<const Vector> &x, const Matrix &anchors, std::uint64_t feature_seed) {
  return identity_score(x, anchors, FeatureMap(x.size(), feature_seed));
}

enum class DegradationKind { identity, smear, blur, downsample_embed, additive_only };

inline const char *to_string(DegradationKind kind) {
  switch (kind) {
  case DegradationKind::identity:
    return "identity";
  case DegradationKind::smear:
    return "smear";
  case DegradationKind::blur:
    return "blur";
  case DegradationKind::downsample_embed:
    return "downsample_embed";
  case DegradationKind::additive_only:
    return "additive_only";
  }
  return "?";
}

inline DegradationKind parse_degradation_kind(const std::string &name) {
  for (auto k : {DegradationKind::identity, DegradationKind::smear, DegradationKind::blur,
                 DegradationKind::downsample_embed, DegradationKind::additive_only}) {
    if (name == to_string(k)) return k;
  }
  throw ValidationError("degradation.kind: unknown kind '" + name + "'");
}

struct DegradationParams {
  Index dim = 0;
  /// Box width for smear (integer >= 1), Gaussian std for blur (> 0).
  double width = 1.0;
  int stride = 1;
  double sigma = 0.0;
};

struct DegradationOp {
  DegradationKind kind = DegradationKind::identity;
  DegradationParams params;
  Matrix matrix;
  double noise_sigma = 0.0;
};

/// Square operator per kind. Every row of smear, blur and downsample_embed sums to 1.
inline DegradationOp make_degradation(DegradationKind kind, const DegradationParams &params) {
  const Index d = params.dim;
  if (d < 1) throw ValidationError("degradation.params.dim: must be positive");
  if (!(params.sigma >= 0.0) || !std::isfinite(params.sigma)) {
    throw ValidationError("degradation.sigma: must be finite and non-negative");
  }
  DegradationOp op{kind, params, Matrix::Identity(d, d), params.sigma};
  switch (kind) {
  case DegradationKind::identity:
  case DegradationKind::additive_only:
    break;
  case DegradationKind::smear: {
    if (!(params.width >= 1.0) || params.width != std::floor(params.width)) {
      throw ValidationError("degradation.params.width: smear width must be an integer >= 1");
    }
    const auto w = static_cast<Index>(params.width);
    const Index left = (w - 1) / 2, right = w - 1 - left;
    op.matrix.setZero();
    for (Index i = 0; i < d; ++i) {
      const Index lo = std::max<Index>(0, i - left), hi = std::min<Index>(d - 1, i + right);
      const double v = 1.0 / static_cast<double>(hi - lo + 1);
      for (Index j = lo; j <= hi; ++j) op.matrix(i, j) = v;
    }
    break;
  }
  case DegradationKind::blur: {
    if (!(params.width > 0.0) || !std::isfinite(params.width)) {
      throw ValidationError("degradation.params.width: blur width must be positive");
    }
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        const double dist = static_cast<double>(i - j);
        op.matrix(i, j) = std::exp(-dist * dist / (2.0 * params.width * params.width));
      }
      op.matrix.row(i) /= op.matrix.row(i).sum();
    }
    break;
  }
  case DegradationKind::downsample_embed: {
    if (params.stride < 1) throw ValidationError("degradation.params.stride: must be >= 1");
    const auto s = static_cast<Index>(params.stride);
    op.matrix.setZero();
    for (Index start = 0; start < d; start += s) {
      const Index len = std::min(s, d - start);
      op.matrix.block(start, start, len, len).setConstant(1.0 / static_cast<double>(len));
    }
    break;
  }
  }
  return op;
}

/// H x0 + sigma eps.
inline Vector degrade(const Eigen::Ref<const Vector> &x0, const DegradationOp &op, RandomStream &rng) {
  if (op.matrix.cols() != x0.size()) {
    throw ValidationError("degrade: operator expects d=" + std::to_string(op.matrix.cols()) + ", got d=" +
                          std::to_string(x0.size()));
  }
  if (!op.matrix.allFinite()) throw ValidationError("degrade: operator has non-finite entries");
  Vector y = op.matrix * x0;
  if (op.noise_sigma > 0.0) {
    for (Index i = 0; i < y.size(); ++i) y[i] += op.noise_sigma * rng.normal();
  }
  return y;
}

struct MetricReport {
  double frechet = 0.0;
  double identity = 0.0;
  double fidelity_l2 = 0.0;
  double loglik_mean = 0.0;
};

/// Set-level metrics of `restored` rows against paired `truth` rows.
/// Identity is scored per row against the single-row album {truth row}.
inline MetricReport evaluate(const Matrix &restored, const Matrix &truth, const MixturePrior &prior,
                             std::uint64_t feature_seed) {
  require_dim(truth.cols(), restored.cols(), "evaluate");
  if (restored.rows() != truth.rows()) throw ValidationError("evaluate: restored and truth row counts differ");
  if (restored.rows() < 2) throw ValidationError("evaluate: need at least 2 rows");
  const FeatureMap phi(restored.cols(), feature_seed);
  MetricReport r;
  r.frechet = frechet_distance(restored, truth);
  const auto n = static_cast<double>(restored.rows());
  for (Index i = 0; i < restored.rows(); ++i) {
    const Vector x = restored.row(i).transpose();
    r.fidelity_l2 += (x - truth.row(i).transpose()).norm() / n;
    r.loglik_mean += log_density(prior, x) / n;
    r.identity += identity_score(x, Matrix(truth.row(i)), phi) / n;
  }
  return r;
}

} // namespace genrestore
