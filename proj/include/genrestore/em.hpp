#pragma once

// Expectation-maximization for full-covariance Gaussian mixtures, with an
// eigenvalue floor on every covariance.
//
// The floor is applied as the constrained M-step: for a scatter matrix S the
// maximizer of the expected complete log-likelihood over {cov : cov >= c I}
// keeps the eigenvectors of S and clamps its eigenvalues at c. EM therefore
// stays monotone with the floor active, as long as the initial parameters
// already satisfy it.

#include "genrestore/mixture_prior.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace genrestore {

enum class EmInit { from_prior, kmeans_pp };

struct EmConfig {
  int num_components = 4;
  int max_iters = 500;
  /// Stop once the mean log-likelihood improves by less than this.
  double log_lik_tol = 1e-9;
  double covariance_floor = kDefaultCovarianceFloor;
  EmInit init_mode = EmInit::from_prior;

  void validate() const {
    if (num_components < 1) throw ValidationError("em.num_components: must be >= 1");
    if (max_iters < 1) throw ValidationError("em.max_iters: must be >= 1");
    if (!(log_lik_tol >= 0.0)) throw ValidationError("em.log_lik_tol: must be non-negative");
    if (!(covariance_floor > 0.0)) throw ValidationError("em.covariance_floor: must be positive");
  }
};

struct EmResult {
  MixturePrior prior;
  /// Number of M-steps performed.
  int iterations = 0;
  bool converged = false;
  /// Mean data log-likelihood at the initialization and after each M-step.
  std::vector<double> log_lik_trace;
};

/// Symmetric eigen-clamp of `cov` at `floor`.
inline Matrix floor_covariance(const Matrix &cov, double floor) {
  Matrix sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("floor_covariance: eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() >= floor) return sym;
  const Vector clamped = eig.eigenvalues().cwiseMax(floor);
  Matrix out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

/// Mean over rows of log p(row).
inline double mean_log_likelihood(const MixturePrior &prior, const Matrix &data) {
  require_dim(prior.dim(), data.cols(), "mean_log_likelihood");
  if (data.rows() == 0) throw ValidationError("mean_log_likelihood: empty data");
  double total = 0.0;
  for (Index n = 0; n < data.rows(); ++n) total += log_density(prior, data.row(n).transpose());
  return total / static_cast<double>(data.rows());
}

namespace detail {

/// Rows of log w_i + log N(x_n; mu_i, cov_i); returns mean log-likelihood.
inline double e_step(const MixturePrior &prior, const Matrix &data, Matrix &resp) {
  const Index M = data.rows();
  const auto k = static_cast<Index>(prior.size());
  resp.resize(M, k);
  Vector terms;
  double total = 0.0;
  for (Index n = 0; n < M; ++n) {
    component_terms(prior, data.row(n).transpose(), terms, nullptr);
    const double lse = log_sum_exp(terms);
    total += lse;
    resp.row(n) = (terms.array() - lse).exp().matrix().transpose();
  }
  return total / static_cast<double>(M);
}

inline Matrix sample_covariance(const Matrix &data) {
  const Vector mu = data.colwise().mean().transpose();
  const Matrix centered = data.rowwise() - mu.transpose();
  return centered.transpose() * centered / static_cast<double>(data.rows());
}

/// k-means++ seeding: each new center is a data row drawn with probability
/// proportional to its squared distance from the nearest existing center.
inline std::vector<Vector> kmeans_pp_centers(const Matrix &data, std::vector<Vector> centers,
                                             std::size_t total, RandomStream &rng) {
  const Index M = data.rows();
  while (centers.size() < total) {
    if (centers.empty()) {
      auto pick = static_cast<Index>(rng.uniform() * static_cast<double>(M));
      centers.push_back(data.row(std::min(pick, M - 1)).transpose());
      continue;
    }
    Vector d2(M);
    for (Index n = 0; n < M; ++n) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto &c : centers) best = std::min(best, (data.row(n).transpose() - c).squaredNorm());
      d2[n] = best;
    }
    if (d2.sum() <= 0.0) d2.setOnes();
    centers.push_back(data.row(static_cast<Index>(sample_categorical(d2, rng))).transpose());
  }
  return centers;
}

inline double mixture_weight_objective(const Vector &base_density, const Vector &extra_density,
                                       double eps) {
  return ((1.0 - eps) * base_density.array() + eps * extra_density.array()).log().mean();
}

inline MixturePrior init_from_prior(const Matrix &data, const EmConfig &config,
                                    const MixturePrior &base, RandomStream &rng) {
  const auto k = static_cast<std::size_t>(config.num_components);
  const double floor = config.covariance_floor;
  std::vector<GaussianComponent> comps;

  if (k < base.size()) {
    // Keep the k base components that explain the data best.
    Matrix resp;
    e_step(base, data, resp);
    const Vector mass = resp.colwise().sum().transpose();
    std::vector<std::size_t> order(base.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return mass[static_cast<Index>(a)] > mass[static_cast<Index>(b)]; });
    double wsum = 0.0;
    for (std::size_t j = 0; j < k; ++j) wsum += base.component(order[j]).weight;
    for (std::size_t j = 0; j < k; ++j) {
      GaussianComponent c = base.component(order[j]);
      c.weight = wsum > 0.0 ? c.weight / wsum : 1.0 / static_cast<double>(k);
      c.cov = floor_covariance(c.cov, floor);
      comps.push_back(std::move(c));
    }
    return MixturePrior(std::move(comps), floor);
  }

  for (const auto &c : base.components()) {
    GaussianComponent copy = c;
    copy.cov = floor_covariance(copy.cov, floor);
    comps.push_back(std::move(copy));
  }
  if (k == base.size()) return MixturePrior(std::move(comps), floor);

  // Extra components sit on k-means++ picks with the base's average
  // covariance. Their total weight eps maximizes the (concave) mean
  // log-likelihood of (1-eps) p_base + eps q_extra, so the initialization is
  // never worse than the base prior itself.
  std::vector<Vector> seeds;
  for (const auto &c : base.components()) seeds.push_back(c.mean);
  seeds = kmeans_pp_centers(data, std::move(seeds), k, rng);
  Matrix avg_cov = Matrix::Zero(base.dim(), base.dim());
  for (const auto &c : base.components()) avg_cov += c.weight * c.cov;
  avg_cov = floor_covariance(avg_cov, floor);

  const std::size_t extras = k - base.size();
  std::vector<GaussianComponent> extra_comps;
  for (std::size_t j = base.size(); j < k; ++j) {
    extra_comps.push_back({1.0 / static_cast<double>(extras), seeds[j], avg_cov});
  }
  const MixturePrior base_floored(comps, floor);
  const MixturePrior extra_mix(extra_comps, floor);
  Vector pb(data.rows()), pe(data.rows());
  for (Index n = 0; n < data.rows(); ++n) {
    pb[n] = std::exp(log_density(base_floored, data.row(n).transpose()));
    pe[n] = std::exp(log_density(extra_mix, data.row(n).transpose()));
  }
  double lo = 0.0, hi = 0.5;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    if (mixture_weight_objective(pb, pe, a) < mixture_weight_objective(pb, pe, b)) lo = a;
    else hi = b;
  }
  double eps = 0.5 * (lo + hi);
  if (!(mixture_weight_objective(pb, pe, eps) >= mixture_weight_objective(pb, pe, 0.0))) eps = 0.0;

  for (auto &c : comps) c.weight *= (1.0 - eps);
  for (auto &c : extra_comps) {
    c.weight *= eps;
    comps.push_back(std::move(c));
  }
  double wsum = 0.0;
  for (const auto &c : comps) wsum += c.weight;
  for (auto &c : comps) c.weight /= wsum;
  return MixturePrior(std::move(comps), floor);
}

inline MixturePrior init_kmeans_pp(const Matrix &data, const EmConfig &config, RandomStream &rng) {
  const auto k = static_cast<std::size_t>(config.num_components);
  const auto centers = kmeans_pp_centers(data, {}, k, rng);
  const Matrix cov = floor_covariance(sample_covariance(data), config.covariance_floor);
  std::vector<GaussianComponent> comps;
  for (const auto &c : centers) comps.push_back({1.0 / static_cast<double>(k), c, cov});
  return MixturePrior(std::move(comps), config.covariance_floor);
}

} // namespace detail

/// Fits a k-component mixture to the rows of `data`.
inline EmResult fit_em(const Matrix &data, const EmConfig &config,
                       const std::optional<MixturePrior> &init_prior, RandomStream &rng) {
  config.validate();
  const Index M = data.rows();
  if (M < 1 || data.cols() < 1) throw ValidationError("fit_em: empty data");
  if (config.num_components > M) {
    throw ValidationError("fit_em: num_components=" + std::to_string(config.num_components) +
                          " exceeds the number of data points M=" + std::to_string(M));
  }
  if (!data.allFinite()) throw ValidationError("fit_em: data contains non-finite values");

  std::optional<MixturePrior> current;
  if (config.init_mode == EmInit::from_prior) {
    if (!init_prior) throw ValidationError("fit_em: init_mode=from_prior requires an initial prior");
    require_dim(init_prior->dim(), data.cols(), "fit_em");
    current.emplace(detail::init_from_prior(data, config, *init_prior, rng));
  } else {
    current.emplace(detail::init_kmeans_pp(data, config, rng));
  }

  const Index d = data.cols();
  const auto k = static_cast<Index>(config.num_components);
  EmResult result{*current, 0, false, {}};
  Matrix resp;
  result.log_lik_trace.push_back(detail::e_step(*current, data, resp));

  while (result.iterations < config.max_iters) {
    const Vector mass = resp.colwise().sum().transpose();
    std::vector<GaussianComponent> next;
    next.reserve(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
      const auto &prev = current->component(static_cast<std::size_t>(i));
      if (mass[i] < 1e-300) {
        next.push_back({0.0, prev.mean, prev.cov});
        continue;
      }
      Vector mu = (data.transpose() * resp.col(i)) / mass[i];
      Matrix scatter = Matrix::Zero(d, d);
      for (Index n = 0; n < M; ++n) {
        const double r = resp(n, i);
        if (r == 0.0) continue;
        const Vector diff = data.row(n).transpose() - mu;
        scatter.noalias() += r * diff * diff.transpose();
      }
      scatter /= mass[i];
      next.push_back({mass[i] / static_cast<double>(M), std::move(mu),
                      floor_covariance(scatter, config.covariance_floor)});
    }
    double wsum = 0.0;
    for (const auto &c : next) wsum += c.weight;
    for (auto &c : next) c.weight /= wsum;
    current.emplace(std::move(next), config.covariance_floor);
    ++result.iterations;

    const double ll = detail::e_step(*current, data, resp);
    const double gain = ll - result.log_lik_trace.back();
    result.log_lik_trace.push_back(ll);
    if (gain < config.log_lik_tol) {
      result.converged = true;
      break;
    }
  }
  result.prior = *current;
  return result;
}

} // namespace genrestore
