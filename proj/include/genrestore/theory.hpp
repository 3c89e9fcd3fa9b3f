#pragma once

// Checks of the forward-process KL and entropy formulas against a general
// Gaussian KL expression and Monte-Carlo estimates.

#include "genrestore/analysis.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace genrestore {

/// KL( N(m1, S1) || N(m2, S2) ) for full covariances.
inline double gaussian_kl(const Vector &m1, const Matrix &S1, const Vector &m2, const Matrix &S2) {
  require_dim(m1.size(), m2.size(), "gaussian_kl");
  const Eigen::LLT<Matrix> l1(S1), l2(S2);
  if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) {
    throw NumericalError("gaussian_kl: covariance not positive definite");
  }
  const auto d = static_cast<double>(m1.size());
  const double trace = l2.solve(S1).trace();
  const Vector diff = m2 - m1;
  const double quad = diff.dot(l2.solve(diff));
  const double logdet1 = 2.0 * Matrix(l1.matrixL()).diagonal().array().log().sum();
  const double logdet2 = 2.0 * Matrix(l2.matrixL()).diagonal().array().log().sum();
  return 0.5 * (trace + quad - d + logdet2 - logdet1);
}

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte-Carlo KL between q = N(sqrt(ab) x0, (1-ab) I) and q' = N(sqrt(ab) y0, (1-ab) I):
/// the sample mean of log q(z) - log q'(z) over z ~ q.
inline McEstimate kl_noisy_monte_carlo(const Vector &x0, const Vector &y0, const NoiseSchedule &schedule, int t,
                                       Index samples, RandomStream &rng) {
  schedule.require_step(t, "kl_noisy_monte_carlo");
  const double ab = schedule.alpha_bar(t);
  const double s = std::sqrt(1.0 - ab);
  const Vector m1 = std::sqrt(ab) * x0, m2 = std::sqrt(ab) * y0;
  double sum = 0.0, sum_sq = 0.0;
  Vector z(x0.size());
  for (Index n = 0; n < samples; ++n) {
    rng.fill_normal(z);
    const Vector point = m1 + s * z;
    const double v = ((point - m2).squaredNorm() - (point - m1).squaredNorm()) / (2.0 * s * s);
    sum += v;
    sum_sq += v * v;
  }
  const auto N = static_cast<double>(samples);
  const double mean = sum / N;
  const double var = std::max(0.0, (sum_sq - N * mean * mean) / (N - 1.0));
  return {mean, std::sqrt(var / N)};
}

/// Gaussian plug-in differential entropy of draws from q(x_t | x0):
/// 0.5 log det(2 pi e Cov_hat).
inline double entropy_forward_monte_carlo(const NoiseSchedule &schedule, int t, Index d, Index samples,
                                          RandomStream &rng) {
  schedule.require_step(t, "entropy_forward_monte_carlo");
  const Vector x0 = Vector::Zero(d);
  Matrix draws(samples, d);
  for (Index n = 0; n < samples; ++n) draws.row(n) = forward_noise(x0, t, schedule, rng).transpose();
  const GaussianFit fit = fit_gaussian(draws);
  const Eigen::LLT<Matrix> llt(fit.cov);
  if (llt.info() != Eigen::Success) throw NumericalError("entropy_forward_monte_carlo: singular sample covariance");
  const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  return 0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi * std::numbers::e) + logdet);
}

struct TheoryCheck {
  std::string name;
  int t = 0;
  double value = 0.0;
  double reference = 0.0;
  /// Absolute deviation allowed for this check.
  double tolerance = 0.0;
  bool pass = false;
};

struct TheoryReport {
  std::vector<int> grid;
  Vector x0, y0;
  std::vector<TheoryCheck> checks;
  [[nodiscard]] bool all_pass() const {
    for (const auto &c : checks) {
      if (!c.pass) return false;
    }
    return !checks.empty();
  }
};

struct TheoryConfig {
  int grid = 20;
  Index dim = 2;
  std::uint64_t seed = 0;
  Index kl_samples = 1'000'000;
  Index entropy_samples = 1'000'000;
  double kl_closed_form_tolerance = 1e-12;
  double kl_standard_errors = 3.0;
  double entropy_relative_tolerance = 0.02;

  void validate(int T) const {
    if (grid < 1 || grid > T) throw ValidationError("theory.grid: must lie in [1, T]");
    if (dim < 1) throw ValidationError("theory.dim: must be positive");
    if (kl_samples < 2 || entropy_samples < 2) throw ValidationError("theory: Monte-Carlo sample counts must be >= 2");
  }
};

/// Evenly spaced steps 1..T (grid = 1 gives t = T / 2).
inline std::vector<int> theory_grid(int T, int grid) {
  if (grid == 1) return {std::max(1, T / 2)};
  std::vector<int> ts;
  for (int j = 0; j < grid; ++j) {
    ts.push_back(1 + static_cast<int>(std::lround(static_cast<double>(j) * (T - 1) / (grid - 1))));
  }
  return ts;
}

/// x0 and y0 are two independent draws from `reference`.
inline TheoryReport theory_check(const NoiseSchedule &schedule, const MixturePrior &reference,
                                 const TheoryConfig &config) {
  const int T = schedule.steps();
  config.validate(T);
  require_dim(config.dim, reference.dim(), "theory_check reference prior");
  TheoryReport report;
  report.grid = theory_grid(T, config.grid);
  RandomStream rng(config.seed);
  const Matrix pair = sample(reference, 2, rng);
  report.x0 = pair.row(0).transpose();
  report.y0 = pair.row(1).transpose();
  const Index d = config.dim;
  const Matrix I = Matrix::Identity(d, d);

  for (std::size_t j = 0; j < report.grid.size(); ++j) {
    const int t = report.grid[j];
    const double ab = schedule.alpha_bar(t);
    const double kl = kl_noisy(report.x0, report.y0, schedule, t);
    const double closed = gaussian_kl(std::sqrt(ab) * report.x0, (1.0 - ab) * I, std::sqrt(ab) * report.y0,
                                      (1.0 - ab) * I);
    const double tol = config.kl_closed_form_tolerance * std::max(1.0, std::abs(closed));
    report.checks.push_back({"kl_closed_form", t, kl, closed, tol, std::abs(kl - closed) <= tol});

    RandomStream kl_rng(derive_seed(config.seed, 2 * j + 1));
    const McEstimate mc = kl_noisy_monte_carlo(report.x0, report.y0, schedule, t, config.kl_samples, kl_rng);
    const double mc_tol = config.kl_standard_errors * mc.standard_error;
    report.checks.push_back({"kl_monte_carlo", t, kl, mc.value, mc_tol, std::abs(kl - mc.value) <= mc_tol});

    RandomStream h_rng(derive_seed(config.seed, 2 * j + 2));
    const double h = entropy_forward(schedule, t, 1);
    const double h_mc = entropy_forward_monte_carlo(schedule, t, 1, config.entropy_samples, h_rng);
    const double h_tol = config.entropy_relative_tolerance * std::abs(h_mc);
    report.checks.push_back({"entropy_monte_carlo_d1", t, h, h_mc, h_tol, std::abs(h - h_mc) <= h_tol});
  }

  bool kl_dec = true, h_inc = true;
  double worst_kl = 0.0, worst_h = 0.0;
  for (int t = 2; t <= T; ++t) {
    const double dk = kl_noisy(report.x0, report.y0, schedule, t) - kl_noisy(report.x0, report.y0, schedule, t - 1);
    const double dh = entropy_forward(schedule, t, d) - entropy_forward(schedule, t - 1, d);
    if (!(dk < 0.0)) kl_dec = false;
    if (!(dh > 0.0)) h_inc = false;
    worst_kl = t == 2 ? dk : std::max(worst_kl, dk);
    worst_h = t == 2 ? dh : std::min(worst_h, dh);
  }
  report.checks.push_back({"kl_strictly_decreasing", T, worst_kl, 0.0, 0.0, kl_dec});
  report.checks.push_back({"entropy_strictly_increasing", T, worst_h, 0.0, 0.0, h_inc});
  return report;
}

} // namespace genrestore
