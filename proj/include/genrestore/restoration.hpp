#pragma once

// End-to-end restoration: project the observation into the diffusion by
// forward noising to step K, then denoise with the (optionally constrained)
// model. The restoration path never sees the clean signal or the degradation.

#include "genrestore/constraining.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace genrestore {

struct RestorationConfig {
  int K = 200;
  SamplerKind sampler = SamplerKind::ddpm;
  std::uint64_t seed = 0;
  bool record_trajectory = false;

  void validate(int T) const {
    if (K < 0 || K > T) {
      throw ValidationError("restore.K: K=" + std::to_string(K) + " outside [0, " + std::to_string(T) + "]");
    }
  }
};

struct RestorationResult {
  Vector restored;
  std::optional<std::vector<SampleState>> trajectory;
  RestorationConfig config_echo;
};

/// y_K = forward_noise(y0, K), then K unguided reverse steps.
inline RestorationResult restore(const DiffusionModel &model, const Eigen::Ref<const Vector> &y0,
                                 const RestorationConfig &config, RandomStream &rng) {
  config.validate(model.schedule().steps());
  require_dim(model.dim(), y0.size(), "restore");
  RestorationResult result;
  result.config_echo = config;
  Vector y_K = forward_noise(y0, config.K, model.schedule(), rng);
  StepObserver observer;
  if (config.record_trajectory) {
    result.trajectory.emplace();
    result.trajectory->push_back({y_K, config.K});
    observer = [&](const SampleState &s) { result.trajectory->push_back(s); };
  }
  result.restored = denoise_from(model, y_K, config.K, config.sampler, rng, observer);
  return result;
}

struct SingleImageRestoration {
  RestorationResult result;
  Album album;
  ConstrainResult constrained;
};

/// Generative album from y0, constrain the prior on it, restore with the
/// constrained model. Failures are rethrown as StageError naming the stage.
inline SingleImageRestoration restore_single_image(const DiffusionModel &base, const Eigen::Ref<const Vector> &y0,
                                                   const AlbumConfig &album_config,
                                                   const ConstrainConfig &constrain_config,
                                                   const RestorationConfig &config, RandomStream &rng,
                                                   int jobs = 1) {
  const Vector obs = y0;
  auto staged = [](const char *stage, auto &&fn) {
    try {
      return fn();
    } catch (const StageError &) {
      throw;
    } catch (const std::exception &e) {
      throw StageError(stage, e.what());
    }
  };
  Album album = staged("album", [&] { return generate_album(base, obs, album_config, rng, jobs); });
  ConstrainResult constrained =
      staged("constrain", [&] { return constrain_prior(base.prior(), album, constrain_config, rng); });
  RestorationResult result = staged("restore", [&] {
    DiffusionModel model(constrained.prior, base.schedule());
    return restore(model, obs, config, rng);
  });
  return {std::move(result), std::move(album), std::move(constrained)};
}

struct PersonalizedRestoration {
  RestorationResult result;
  ConstrainResult constrained;
};

inline PersonalizedRestoration restore_personalized(const DiffusionModel &base, const Album &anchors,
                                                    const Eigen::Ref<const Vector> &y0,
                                                    const ConstrainConfig &constrain_config,
                                                    const RestorationConfig &config, RandomStream &rng) {
  const Vector obs = y0;
  ConstrainResult constrained = [&] {
    try {
      return constrain_prior(base.prior(), anchors, constrain_config, rng);
    } catch (const std::exception &e) {
      throw StageError("constrain", e.what());
    }
  }();
  RestorationResult result = [&] {
    try {
      DiffusionModel model(constrained.prior, base.schedule());
      return restore(model, obs, config, rng);
    } catch (const std::exception &e) {
      throw StageError("restore", e.what());
    }
  }();
  return {std::move(result), std::move(constrained)};
}

} // namespace genrestore
