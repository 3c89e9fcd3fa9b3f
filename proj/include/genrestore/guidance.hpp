#pragma once

// Skip guidance toward a degraded observation, and generative-album synthesis.

#include "genrestore/diffusion.hpp"
#include "genrestore/parallel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace genrestore {

enum class JacobianMode { exact, identity };

inline const char *to_string(JacobianMode mode) { return mode == JacobianMode::exact ? "exact" : "identity"; }

inline JacobianMode parse_jacobian_mode(const std::string &name) {
  if (name == "exact") return JacobianMode::exact;
  if (name == "identity") return JacobianMode::identity;
  throw ValidationError("jacobian_mode: expected exact or identity; got '" + name + "'");
}

struct GuidanceConfig {
  double lambda = 0.1;
  /// Guidance fires on reverse steps with (K - t) mod skip_n == 0.
  int skip_n = 20;
  JacobianMode jacobian_mode = JacobianMode::identity;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("guidance.lambda: must be >= 0");
    if (skip_n < 1) throw ValidationError("guidance.skip_n: must be >= 1");
  }
};

enum class AlbumSource { generative, personal };

inline const char *to_string(AlbumSource s) { return s == AlbumSource::generative ? "generative" : "personal"; }

inline AlbumSource parse_album_source(const std::string &name) {
  if (name == "generative") return AlbumSource::generative;
  if (name == "personal") return AlbumSource::personal;
  throw ValidationError("album.source: expected generative or personal; got '" + name + "'");
}

struct AlbumProvenance {
  std::string observation_id;
  int K_album = 0;
  GuidanceConfig guidance;
  SamplerKind sampler = SamplerKind::ddpm;
  /// Master seed; member i runs on stream derive_seed(seed, i).
  std::uint64_t seed = 0;
};

/// Anchor set: one sample per row.
struct Album {
  AlbumSource source = AlbumSource::personal;
  Matrix samples;
  std::optional<AlbumProvenance> provenance;

  [[nodiscard]] Index size() const noexcept { return samples.rows(); }
  [[nodiscard]] Index dim() const noexcept { return samples.cols(); }

  void validate() const {
    if (samples.rows() < 1 || samples.cols() < 1) throw ValidationError("album: must contain at least one sample");
    if (!samples.allFinite()) throw ValidationError("album: non-finite sample values");
  }
};

/// grad_{x_t} |y0 - x0_hat(x_t)|^2.
///   exact:    -2 J^T (y0 - x0_hat), J = (I + (1 - ab) H_t(x_t)) / sqrt(ab)
///   identity: -2 (y0 - x0_hat)
inline Vector guidance_gradient(const DiffusionModel &model, const SampleState &state,
                                const Eigen::Ref<const Vector> &y0, JacobianMode mode) {
  model.schedule().require_step(state.t, "guidance_gradient");
  require_dim(model.dim(), state.x.size(), "guidance_gradient");
  require_dim(model.dim(), y0.size(), "guidance_gradient");
  const Vector residual = y0 - tweedie_denoise(model, state);
  if (mode == JacobianMode::identity) return -2.0 * residual;
  const double ab = model.schedule().alpha_bar(state.t);
  Matrix J = (1.0 - ab) * hessian_log_density(model.marginal(state.t), state.x);
  J.diagonal().array() += 1.0;
  J /= std::sqrt(ab);
  return -2.0 * J.transpose() * residual;
}

inline bool guidance_fires(int K, int t, int skip_n) { return (K - t) % skip_n == 0; }

/// Called after every reverse step; `guided` tells whether a correction was
/// scheduled on the step that produced `state` (i.e. from t = state.t + 1).
using GuidedStepObserver = std::function<void(const SampleState &state, bool guided)>;

/// Noise y0 to step K, then reverse K steps. On scheduled steps the gradient
/// is taken at the pre-step state x_t and the step output becomes
/// x_{t-1} - lambda g.
inline Vector guided_denoise_from(const DiffusionModel &model, const Eigen::Ref<const Vector> &y0, int K,
                                  const GuidanceConfig &guidance, SamplerKind sampler, RandomStream &rng,
                                  const GuidedStepObserver &observer = {}) {
  guidance.validate();
  if (K < 1 || K > model.schedule().steps()) {
    throw ValidationError("guided_denoise_from: K=" + std::to_string(K) + " outside [1, " +
                          std::to_string(model.schedule().steps()) + "]");
  }
  require_dim(model.dim(), y0.size(), "guided_denoise_from");
  SampleState state{forward_noise(y0, K, model.schedule(), rng), K};
  while (state.t > 0) {
    const bool fires = guidance_fires(K, state.t, guidance.skip_n);
    SampleState next = reverse_step(model, state, sampler, rng);
    if (fires && guidance.lambda > 0.0) {
      next.x -= guidance.lambda * guidance_gradient(model, state, y0, guidance.jacobian_mode);
    }
    state = std::move(next);
    if (observer) observer(state, fires);
  }
  return std::move(state.x);
}

struct AlbumConfig {
  int K_album = 600;
  int size = 16;
  GuidanceConfig guidance;
  SamplerKind sampler = SamplerKind::ddpm;

  void validate(int T) const {
    if (size < 1) throw ValidationError("album.size: must be >= 1");
    if (K_album < 1 || K_album > T) throw ValidationError("album.K_album: must lie in [1, T]");
    guidance.validate();
  }
};

/// M independent guided runs from y0, each with fresh forward noise and
/// fresh reverse noise.
inline Album generate_album(const DiffusionModel &model, const Eigen::Ref<const Vector> &y0,
                            const AlbumConfig &config, RandomStream &rng, int jobs = 1,
                            std::string observation_id = {}) {
  config.validate(model.schedule().steps());
  require_dim(model.dim(), y0.size(), "generate_album");
  const std::uint64_t master = rng.next_u64();
  Album album;
  album.source = AlbumSource::generative;
  album.samples.resize(config.size, model.dim());
  const Vector obs = y0;
  parallel_for(static_cast<std::size_t>(config.size), jobs, [&](std::size_t i) {
    RandomStream member(derive_seed(master, i));
    album.samples.row(static_cast<Index>(i)) =
        guided_denoise_from(model, obs, config.K_album, config.guidance, config.sampler, member).transpose();
  });
  album.provenance = AlbumProvenance{std::move(observation_id), config.K_album, config.guidance, config.sampler,
                                     master};
  return album;
}

} // namespace genrestore
