#pragma once

// Noise schedule, forward noising, the analytic diffusion model built on a
// mixture prior, the Tweedie denoiser and three reverse samplers.
//
// Time convention: t = 1..T index noising steps, t = 0 is a clean sample with
// alpha_bar(0) = 1.

#include "genrestore/mixture_prior.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace genrestore {

enum class ScheduleKind { linear };

class NoiseSchedule {
public:
  /// Linearly spaced betas from beta_start to beta_end inclusive.
  static NoiseSchedule linear(int T, double beta_start, double beta_end) {
    if (T < 1) throw ValidationError("schedule.T: must be >= 1");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
      throw ValidationError("schedule: require 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule s;
    s.kind_ = ScheduleKind::linear;
    s.beta_start_ = beta_start;
    s.beta_end_ = beta_end;
    s.betas_.resize(static_cast<std::size_t>(T));
    s.alphas_.resize(s.betas_.size());
    s.alpha_bars_.resize(s.betas_.size());
    double prod = 1.0;
    for (int i = 0; i < T; ++i) {
      const double frac = T == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(T - 1);
      const auto u = static_cast<std::size_t>(i);
      s.betas_[u] = beta_start + (beta_end - beta_start) * frac;
      s.alphas_[u] = 1.0 - s.betas_[u];
      prod *= s.alphas_[u];
      s.alpha_bars_[u] = prod;
    }
    s.check_invariants();
    return s;
  }

  [[nodiscard]] ScheduleKind kind() const noexcept { return kind_; }
  [[nodiscard]] int steps() const noexcept { return static_cast<int>(betas_.size()); }
  [[nodiscard]] double beta_start() const noexcept { return beta_start_; }
  [[nodiscard]] double beta_end() const noexcept { return beta_end_; }
  [[nodiscard]] const std::vector<double> &betas() const noexcept { return betas_; }
  [[nodiscard]] const std::vector<double> &alphas() const noexcept { return alphas_; }
  [[nodiscard]] const std::vector<double> &alpha_bars() const noexcept { return alpha_bars_; }

  [[nodiscard]] double beta(int t) const { return betas_.at(index(t)); }
  [[nodiscard]] double alpha(int t) const { return alphas_.at(index(t)); }
  [[nodiscard]] double alpha_bar(int t) const {
    if (t == 0) return 1.0;
    return alpha_bars_.at(index(t));
  }
  /// beta_tilde_t = beta_t (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t); zero at t = 1.
  [[nodiscard]] double posterior_variance(int t) const {
    return beta(t) * (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t));
  }

  void require_step(int t, const char *what) const {
    if (t < 1 || t > steps()) {
      throw ValidationError(std::string(what) + ": t=" + std::to_string(t) + " outside [1, " +
                            std::to_string(steps()) + "]");
    }
  }

private:
  NoiseSchedule() = default;

  [[nodiscard]] std::size_t index(int t) const {
    require_step(t, "schedule");
    return static_cast<std::size_t>(t - 1);
  }

  void check_invariants() const {
    double prev = 1.0;
    for (std::size_t i = 0; i < alpha_bars_.size(); ++i) {
      const double ab = alpha_bars_[i];
      if (!(ab > 0.0 && ab < 1.0)) {
        throw ValidationError("schedule.alpha_bars[" + std::to_string(i) + "]: outside (0,1)");
      }
      if (!(ab < prev)) {
        throw ValidationError("schedule.alpha_bars[" + std::to_string(i) + "]: not strictly decreasing");
      }
      prev = ab;
    }
  }

  ScheduleKind kind_ = ScheduleKind::linear;
  double beta_start_ = 0.0;
  double beta_end_ = 0.0;
  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
};

inline NoiseSchedule make_schedule(ScheduleKind kind, int T, double beta_start, double beta_end) {
  switch (kind) {
  case ScheduleKind::linear:
    return NoiseSchedule::linear(T, beta_start, beta_end);
  }
  throw ValidationError("schedule.kind: unknown");
}

inline NoiseSchedule default_schedule() { return NoiseSchedule::linear(1000, 1e-4, 0.02); }

struct SampleState {
  Vector x;
  int t = 0;
};

/// sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps. t = 0 returns x0 and
/// draws nothing.
inline Vector forward_noise(const Eigen::Ref<const Vector> &x0, int t, const NoiseSchedule &schedule,
                            RandomStream &rng) {
  if (t == 0) return x0;
  schedule.require_step(t, "forward_noise");
  const double ab = schedule.alpha_bar(t);
  Vector eps = rng.normal_vector(x0.size());
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

/// Per-component Gaussian posterior p(x0 | x_t, component i) = N(gain_i x_t + offset_i, cov_i).
struct ConjugatePosterior {
  std::vector<Matrix> gain;
  std::vector<Vector> offset;
  std::vector<Matrix> cov_cholesky;
};

/// The analytic stand-in for a trained diffusion network: a mixture prior
/// plus a schedule. Diffused marginals diffuse(prior, alpha_bar_t) and the
/// conjugate posteriors are computed on first use per t and cached; the cache
/// is safe under concurrent readers. Move-only.
class DiffusionModel {
public:
  DiffusionModel(MixturePrior prior, NoiseSchedule schedule)
      : prior_(std::move(prior)), schedule_(std::move(schedule)),
        slots_(std::make_unique<Slot[]>(static_cast<std::size_t>(schedule_.steps()) + 1)) {}

  DiffusionModel(DiffusionModel &&) noexcept = default;
  DiffusionModel &operator=(DiffusionModel &&) noexcept = default;

  [[nodiscard]] const MixturePrior &prior() const noexcept { return prior_; }
  [[nodiscard]] const NoiseSchedule &schedule() const noexcept { return schedule_; }
  [[nodiscard]] Index dim() const noexcept { return prior_.dim(); }

  /// Marginal of x_t; t = 0 is the prior itself.
  [[nodiscard]] const MixturePrior &marginal(int t) const {
    if (t == 0) return prior_;
    return slot(t).marginal.value();
  }

  [[nodiscard]] const ConjugatePosterior &posterior(int t) const { return slot(t).posterior.value(); }

private:
  struct Slot {
    std::once_flag once;
    std::optional<MixturePrior> marginal;
    std::optional<ConjugatePosterior> posterior;
  };

  const Slot &slot(int t) const {
    schedule_.require_step(t, "DiffusionModel");
    Slot &s = slots_[static_cast<std::size_t>(t)];
    std::call_once(s.once, [&] {
      const double ab = schedule_.alpha_bar(t);
      s.marginal.emplace(diffuse(prior_, ab));
      s.posterior.emplace(conjugate_posterior(ab));
    });
    return s;
  }

  // Information form: cov = (P + c I)^{-1}, mean = cov (P mu + sqrt(ab)/(1-ab) x_t),
  // c = ab / (1 - ab).
  [[nodiscard]] ConjugatePosterior conjugate_posterior(double ab) const {
    ConjugatePosterior post;
    const Index d = prior_.dim();
    const double c = ab / (1.0 - ab);
    const double obs_gain = std::sqrt(ab) / (1.0 - ab);
    for (std::size_t i = 0; i < prior_.size(); ++i) {
      Matrix info = prior_.precision(i);
      info.diagonal().array() += c;
      Eigen::LLT<Matrix> llt(info);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("conjugate posterior: information matrix not PD for component " +
                             std::to_string(i));
      }
      Matrix cov = llt.solve(Matrix::Identity(d, d));
      cov = 0.5 * (cov + cov.transpose()).eval();
      Eigen::LLT<Matrix> cov_llt(cov);
      if (cov_llt.info() != Eigen::Success) {
        throw NumericalError("conjugate posterior: covariance not PD for component " + std::to_string(i));
      }
      post.offset.push_back(cov * (prior_.precision(i) * prior_.component(i).mean));
      post.gain.push_back(obs_gain * cov);
      post.cov_cholesky.push_back(cov_llt.matrixL());
    }
    return post;
  }

  MixturePrior prior_;
  NoiseSchedule schedule_;
  std::unique_ptr<Slot[]> slots_;
};

enum class DenoisePath { tweedie_score, posterior_mean };

inline constexpr double kDenoiserAgreementTolerance = 1e-8;

/// E[x0 | x_t] along one of two routes:
///   tweedie_score:  (x_t + (1 - ab) score_t(x_t)) / sqrt(ab)
///   posterior_mean: sum_i r_i(x_t) E[x0 | x_t, i] from the conjugate posteriors
inline Vector denoised_mean(const DiffusionModel &model, const SampleState &state, DenoisePath path) {
  model.schedule().require_step(state.t, "tweedie_denoise");
  require_dim(model.dim(), state.x.size(), "tweedie_denoise");
  const double ab = model.schedule().alpha_bar(state.t);
  const MixturePrior &marg = model.marginal(state.t);
  if (path == DenoisePath::tweedie_score) {
    return (state.x + (1.0 - ab) * score(marg, state.x)) / std::sqrt(ab);
  }
  const Vector r = responsibilities(marg, state.x);
  const ConjugatePosterior &post = model.posterior(state.t);
  Vector out = Vector::Zero(model.dim());
  for (Index i = 0; i < r.size(); ++i) {
    if (r[i] == 0.0) continue;
    const auto u = static_cast<std::size_t>(i);
    out.noalias() += r[i] * (post.gain[u] * state.x + post.offset[u]);
  }
  return out;
}

/// Tweedie posterior mean. Both routes are evaluated and must agree to
/// 1e-8 * max(1, |x0_hat|); otherwise NumericalError.
inline Vector tweedie_denoise(const DiffusionModel &model, const SampleState &state) {
  Vector a = denoised_mean(model, state, DenoisePath::tweedie_score);
  const Vector b = denoised_mean(model, state, DenoisePath::posterior_mean);
  if ((a - b).norm() > kDenoiserAgreementTolerance * std::max(1.0, a.norm())) {
    throw NumericalError("tweedie_denoise: score route and posterior-mean route disagree at t=" +
                         std::to_string(state.t));
  }
  return a;
}

inline void require_reverse_step(const DiffusionModel &model, const SampleState &state, const char *what) {
  if (state.t == 0) throw ValidationError(std::string(what) + ": state is already at t=0");
  model.schedule().require_step(state.t, what);
  require_dim(model.dim(), state.x.size(), what);
}

/// Ancestral step t -> t-1 with the analytic score standing in for the network.
inline SampleState ddpm_step(const DiffusionModel &model, const SampleState &state, RandomStream &rng) {
  require_reverse_step(model, state, "ddpm_step");
  const NoiseSchedule &s = model.schedule();
  const int t = state.t;
  Vector x = (state.x + s.beta(t) * score(model.marginal(t), state.x)) / std::sqrt(s.alpha(t));
  if (t > 1) {
    const double sigma = std::sqrt(s.posterior_variance(t));
    for (Index i = 0; i < x.size(); ++i) x[i] += sigma * rng.normal();
  }
  return {std::move(x), t - 1};
}

/// One draw from the true reverse kernel p(x_{t-1} | x_t): pick a component
/// by responsibility, draw x0 from its conjugate posterior, then draw from
/// q(x_{t-1} | x_t, x0).
inline SampleState exact_reverse_step(const DiffusionModel &model, const SampleState &state,
                                      RandomStream &rng) {
  require_reverse_step(model, state, "exact_reverse_step");
  const NoiseSchedule &s = model.schedule();
  const int t = state.t;
  const Vector r = responsibilities(model.marginal(t), state.x);
  const std::size_t c = sample_categorical(r, rng);
  const ConjugatePosterior &post = model.posterior(t);
  Vector z = rng.normal_vector(model.dim());
  Vector x0 = post.gain[c] * state.x + post.offset[c] + post.cov_cholesky[c] * z;
  if (t == 1) return {std::move(x0), 0};

  const double ab = s.alpha_bar(t), ab_prev = s.alpha_bar(t - 1);
  const double coef_x0 = std::sqrt(ab_prev) * s.beta(t) / (1.0 - ab);
  const double coef_xt = std::sqrt(s.alpha(t)) * (1.0 - ab_prev) / (1.0 - ab);
  const double sigma = std::sqrt(s.posterior_variance(t));
  Vector x = coef_x0 * x0 + coef_xt * state.x;
  for (Index i = 0; i < x.size(); ++i) x[i] += sigma * rng.normal();
  return {std::move(x), t - 1};
}

/// DDIM update with sigma_t = eta * sqrt(beta_tilde_t); eta = 0 draws nothing.
inline SampleState ddim_step(const DiffusionModel &model, const SampleState &state, double eta,
                             RandomStream &rng) {
  require_reverse_step(model, state, "ddim_step");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("ddim_step: eta must lie in [0,1]");
  const NoiseSchedule &s = model.schedule();
  const int t = state.t;
  const double ab = s.alpha_bar(t), ab_prev = s.alpha_bar(t - 1);
  const Vector x0_hat = tweedie_denoise(model, state);
  const Vector eps_hat = (state.x - std::sqrt(ab) * x0_hat) / std::sqrt(1.0 - ab);
  const double sigma = eta * std::sqrt(s.posterior_variance(t));
  const double dir = std::sqrt(std::max(0.0, 1.0 - ab_prev - sigma * sigma));
  Vector x = std::sqrt(ab_prev) * x0_hat + dir * eps_hat;
  if (sigma > 0.0) {
    for (Index i = 0; i < x.size(); ++i) x[i] += sigma * rng.normal();
  }
  return {std::move(x), t - 1};
}

enum class SamplerKind { ddpm, exact, ddim };

inline SampleState reverse_step(const DiffusionModel &model, const SampleState &state, SamplerKind kind,
                                RandomStream &rng, double ddim_eta = 0.0) {
  switch (kind) {
  case SamplerKind::ddpm:
    return ddpm_step(model, state, rng);
  case SamplerKind::exact:
    return exact_reverse_step(model, state, rng);
  case SamplerKind::ddim:
    return ddim_step(model, state, ddim_eta, rng);
  }
  throw ValidationError("reverse_step: unknown sampler");
}

/// Called after every reverse step with the new state.
using StepObserver = std::function<void(const SampleState &)>;

/// K reverse steps from t = K down to t = 0. K = 0 returns x_K unchanged.
inline Vector denoise_from(const DiffusionModel &model, const Eigen::Ref<const Vector> &x_K, int K,
                           SamplerKind sampler, RandomStream &rng, const StepObserver &observer = {},
                           double ddim_eta = 0.0) {
  if (K < 0 || K > model.schedule().steps()) {
    throw ValidationError("denoise_from: K=" + std::to_string(K) + " outside [0, " +
                          std::to_string(model.schedule().steps()) + "]");
  }
  require_dim(model.dim(), x_K.size(), "denoise_from");
  SampleState state{x_K, K};
  while (state.t > 0) {
    state = reverse_step(model, state, sampler, rng, ddim_eta);
    if (observer) observer(state);
  }
  return std::move(state.x);
}

inline const char *to_string(SamplerKind kind) {
  switch (kind) {
  case SamplerKind::ddpm:
    return "ddpm";
  case SamplerKind::exact:
    return "exact";
  case SamplerKind::ddim:
    return "ddim";
  }
  return "?";
}

inline SamplerKind parse_sampler(const std::string &name) {
  if (name == "ddpm") return SamplerKind::ddpm;
  if (name == "exact") return SamplerKind::exact;
  if (name == "ddim") return SamplerKind::ddim;
  throw ValidationError("sampler: expected one of ddpm, exact, ddim; got '" + name + "'");
}

} // namespace genrestore
