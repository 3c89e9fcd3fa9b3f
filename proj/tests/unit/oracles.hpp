#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// the library's numerical routines; only its data types are used.

#include "genrestore/genrestore.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using genrestore::Index;
using genrestore::Matrix;
using genrestore::Vector;

/// Gaussian density by explicit inverse and determinant.
inline double gaussian_pdf(const Vector &x, const Vector &mu, const Matrix &cov) {
  const auto d = static_cast<double>(x.size());
  const Vector diff = x - mu;
  const double quad = diff.dot(cov.fullPivLu().inverse() * diff);
  return std::exp(-0.5 * quad) / std::sqrt(std::pow(2.0 * std::numbers::pi, d) * cov.determinant());
}

/// log sum_i w_i N(x; mu_i, S_i) by direct summation (no log-sum-exp).
inline double mixture_log_density(const genrestore::MixturePrior &prior, const Vector &x) {
  double p = 0.0;
  for (const auto &c : prior.components()) p += c.weight * gaussian_pdf(x, c.mean, c.cov);
  return std::log(p);
}

inline Vector fd_gradient(const std::function<double(const Vector &)> &f, const Vector &x, double h) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_jacobian(const std::function<Vector(const Vector &)> &f, const Vector &x, double h) {
  const Vector f0 = f(x);
  Matrix J(f0.size(), x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vector a = x, b = x;
    a[j] += h;
    b[j] -= h;
    J.col(j) = (f(a) - f(b)) / (2.0 * h);
  }
  return J;
}

inline double relative_error(const Vector &approx, const Vector &exact) {
  return (approx - exact).norm() / std::max(exact.norm(), 1.0);
}

inline double relative_error(const Matrix &approx, const Matrix &exact) {
  return (approx - exact).norm() / std::max(exact.norm(), 1.0);
}

/// Random SPD matrix A A^T + floor I with A having N(0, scale^2) entries.
inline Matrix random_spd(Index d, genrestore::RandomStream &rng, double scale = 0.7, double floor = 0.2) {
  Matrix A(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) A(i, j) = scale * rng.normal();
  }
  Matrix S = A * A.transpose();
  S.diagonal().array() += floor;
  return 0.5 * (S + S.transpose());
}

inline genrestore::MixturePrior random_prior(Index d, int k, genrestore::RandomStream &rng, double spread = 2.0) {
  std::vector<genrestore::GaussianComponent> comps;
  std::vector<double> w;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    w.push_back(0.2 + rng.uniform());
    total += w.back();
  }
  for (int i = 0; i < k; ++i) {
    Vector mu(d);
    for (Index j = 0; j < d; ++j) mu[j] = spread * rng.normal();
    comps.push_back({w[static_cast<std::size_t>(i)] / total, mu, random_spd(d, rng)});
  }
  // Force an exact unit sum on the last weight.
  double s = 0.0;
  for (int i = 0; i + 1 < k; ++i) s += comps[static_cast<std::size_t>(i)].weight;
  comps.back().weight = 1.0 - s;
  return genrestore::MixturePrior(std::move(comps));
}

/// Greedy assignment: repeatedly take the closest remaining (fitted, truth) pair.
inline std::vector<std::pair<std::size_t, std::size_t>> greedy_match(const std::vector<Vector> &fitted,
                                                                     const std::vector<Vector> &truth) {
  std::vector<bool> used_f(fitted.size(), false), used_t(truth.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t step = 0; step < std::min(fitted.size(), truth.size()); ++step) {
    double best = INFINITY;
    std::pair<std::size_t, std::size_t> arg{0, 0};
    for (std::size_t i = 0; i < fitted.size(); ++i) {
      if (used_f[i]) continue;
      for (std::size_t j = 0; j < truth.size(); ++j) {
        if (used_t[j]) continue;
        const double dist = (fitted[i] - truth[j]).norm();
        if (dist < best) {
          best = dist;
          arg = {i, j};
        }
      }
    }
    used_f[arg.first] = used_t[arg.second] = true;
    out.push_back(arg);
  }
  return out;
}

struct Moments {
  Vector mean;
  Matrix cov;
};

inline Moments moments(const Matrix &rows) {
  Moments m;
  m.mean = rows.colwise().mean().transpose();
  const Matrix c = rows.rowwise() - m.mean.transpose();
  m.cov = c.transpose() * c / static_cast<double>(rows.rows() - 1);
  return m;
}

/// 3-sigma check of a sample mean against `mu` when the true covariance is `cov`.
inline bool mean_within_3sigma(const Moments &m, const Vector &mu, const Matrix &cov, Index n) {
  for (Index i = 0; i < mu.size(); ++i) {
    if (std::abs(m.mean[i] - mu[i]) > 3.0 * std::sqrt(cov(i, i) / static_cast<double>(n))) return false;
  }
  return true;
}

/// 3-sigma check of sample covariance entries, using the Gaussian sampling
/// variance Var(S_ij) = (S_ij^2 + S_ii S_jj) / (n - 1).
inline bool cov_within_3sigma(const Moments &m, const Matrix &cov, Index n) {
  for (Index i = 0; i < cov.rows(); ++i) {
    for (Index j = 0; j < cov.cols(); ++j) {
      const double sd = std::sqrt((cov(i, j) * cov(i, j) + cov(i, i) * cov(j, j)) / static_cast<double>(n - 1));
      if (std::abs(m.cov(i, j) - cov(i, j)) > 3.0 * sd) return false;
    }
  }
  return true;
}

/// 1D Frechet distance between Gaussian fits: (m1 - m2)^2 + (s1 - s2)^2.
/// (mu1 - mu2)^2 + (s1 - s2)^2 with both variances shifted by `reg`.
inline double frechet_1d(const Matrix &a, const Matrix &b, double reg = 0.0) {
  const Moments ma = moments(a), mb = moments(b);
  const double s1 = std::sqrt(ma.cov(0, 0) + reg), s2 = std::sqrt(mb.cov(0, 0) + reg);
  return (ma.mean[0] - mb.mean[0]) * (ma.mean[0] - mb.mean[0]) + (s1 - s2) * (s1 - s2);
}

/// Product of (1 - beta_t) in long double.
inline long double alpha_bar_product(int T, double b0, double b1, int t) {
  long double p = 1.0L;
  for (int i = 0; i < t; ++i) {
    const long double frac = T == 1 ? 0.0L : static_cast<long double>(i) / static_cast<long double>(T - 1);
    p *= 1.0L - (static_cast<long double>(b0) + (static_cast<long double>(b1) - b0) * frac);
  }
  return p;
}

/// Posterior mean for a single Gaussian prior N(m0, s0^2 I) observed as
/// x_t = sqrt(ab) x0 + sqrt(1-ab) eps.
inline Vector isotropic_posterior_mean(const Vector &xt, const Vector &m0, double s0sq, double ab) {
  return (s0sq * std::sqrt(ab) * xt + (1.0 - ab) * m0) / (ab * s0sq + 1.0 - ab);
}

} // namespace oracle
