#pragma once

// Re-estimates the prior on an anchor album. This is the analytic-model
// counterpart of fine-tuning a pretrained network on the album: EM starts
// from the base prior, and the fit can be blended back toward the base.

#include "genrestore/em.hpp"
#include "genrestore/guidance.hpp"

#include <algorithm>

namespace genrestore {

struct ConstrainConfig {
  EmConfig em;
  /// Weight rho on the base prior in the blended result; 0 keeps the pure fit.
  double base_blend = 0.0;

  void validate() const {
    em.validate();
    if (!(base_blend >= 0.0 && base_blend <= 1.0)) throw ValidationError("constrain.base_blend: must lie in [0,1]");
  }

  static ConstrainConfig for_album(AlbumSource source, Index album_size) {
    ConstrainConfig c;
    c.em.num_components = static_cast<int>(std::min<Index>(4, album_size));
    c.base_blend = source == AlbumSource::personal ? 0.2 : 0.0;
    return c;
  }
};

struct ConstrainResult {
  MixturePrior prior;
  EmResult fit;
  double album_loglik_base = 0.0;
  double album_loglik_result = 0.0;
};

/// Mixture of the album fit at weights (1 - rho) w and the base at rho w_base,
/// with zero-weight components dropped.
inline MixturePrior blend_priors(const MixturePrior &fit, const MixturePrior &base, double rho) {
  require_dim(base.dim(), fit.dim(), "blend_priors");
  std::vector<GaussianComponent> comps;
  for (const auto &c : fit.components()) {
    if ((1.0 - rho) * c.weight > 0.0) comps.push_back({(1.0 - rho) * c.weight, c.mean, c.cov});
  }
  for (const auto &c : base.components()) {
    if (rho * c.weight > 0.0) comps.push_back({rho * c.weight, c.mean, c.cov});
  }
  double total = 0.0;
  for (const auto &c : comps) total += c.weight;
  for (auto &c : comps) c.weight /= total;
  return MixturePrior(std::move(comps), std::min(fit.covariance_floor(), base.covariance_floor()));
}

inline ConstrainResult constrain_prior(const MixturePrior &base, const Album &album, const ConstrainConfig &config,
                                       RandomStream &rng) {
  config.validate();
  album.validate();
  require_dim(base.dim(), album.dim(), "constrain_prior");
  if (config.em.num_components > album.size()) {
    throw ValidationError("constrain_prior: em.num_components=" + std::to_string(config.em.num_components) +
                          " exceeds album size " + std::to_string(album.size()));
  }
  EmResult fit = fit_em(album.samples, config.em, base, rng);
  MixturePrior blended = blend_priors(fit.prior, base, config.base_blend);
  const double before = mean_log_likelihood(base, album.samples);
  const double after = mean_log_likelihood(blended, album.samples);
  return {std::move(blended), std::move(fit), before, after};
}

} // namespace genrestore
