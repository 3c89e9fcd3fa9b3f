#pragma once

// Ablation sweep drivers. Every trial owns a seed derived from the master
// seed and its index; within a trial the restoration stream is re-created
// from the same seed for every grid point and arm (common random numbers), so
// grid comparisons are paired. Results are independent of the job count.

#include "genrestore/restoration.hpp"
#include "genrestore/stats.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace genrestore {

struct SweepRow {
  int param = 0;
  std::string arm;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
  int trials = 0;
};

/// Per-trial observations keyed by (param, arm, metric), plus the emitted rows.
class SweepData {
public:
  using Key = std::tuple<int, std::string, std::string>;

  explicit SweepData(std::string param_name = "param") : param_name_(std::move(param_name)) {}

  [[nodiscard]] const std::string &param_name() const noexcept { return param_name_; }

  std::vector<double> &series(int param, const std::string &arm, const std::string &metric, std::size_t trials) {
    auto &v = series_[{param, arm, metric}];
    if (v.size() != trials) v.assign(trials, 0.0);
    return v;
  }

  [[nodiscard]] const std::vector<double> &at(int param, const std::string &arm, const std::string &metric) const {
    auto it = series_.find({param, arm, metric});
    if (it == series_.end()) {
      throw ValidationError("sweep: no series for " + param_name_ + "=" + std::to_string(param) + ", arm " + arm +
                            ", metric " + metric);
    }
    return it->second;
  }

  /// Writable slot of an existing series; safe to call concurrently for distinct trial indices.
  std::vector<double> &slot(int param, const std::string &arm, const std::string &metric) {
    return const_cast<std::vector<double> &>(std::as_const(*this).at(param, arm, metric));
  }

  [[nodiscard]] bool has(int param, const std::string &arm, const std::string &metric) const {
    return series_.count({param, arm, metric}) != 0;
  }

  void add_row(int param, const std::string &arm, const std::string &metric, std::size_t trials) {
    const auto &v = at(param, arm, metric);
    rows_.push_back({param, arm, metric, stats::mean(v), stats::standard_error(v), static_cast<int>(trials)});
  }

  void add_row(SweepRow row) { rows_.push_back(std::move(row)); }

  [[nodiscard]] const std::vector<SweepRow> &rows() const noexcept { return rows_; }

private:
  std::string param_name_;
  std::map<Key, std::vector<double>> series_;
  std::vector<SweepRow> rows_;
};

namespace detail {

inline constexpr int kBootstrapResamples = 200;

/// Frechet distance of paired row sets and its bootstrap standard error
/// (rows resampled jointly).
inline std::pair<double, double> frechet_with_bootstrap(const Matrix &a, const Matrix &b, std::uint64_t seed) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (a.rows() < 2) return {nan, nan};
  const double value = frechet_distance(a, b);
  RandomStream rng(seed);
  std::vector<double> boot;
  boot.reserve(kBootstrapResamples);
  Matrix ra(a.rows(), a.cols()), rb(b.rows(), b.cols());
  for (int r = 0; r < kBootstrapResamples; ++r) {
    for (Index i = 0; i < a.rows(); ++i) {
      const auto j = static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(a.rows()));
      ra.row(i) = a.row(j);
      rb.row(i) = b.row(j);
    }
    boot.push_back(frechet_distance(ra, rb));
  }
  return {value, std::sqrt(stats::variance(boot))};
}

inline void require_trials(int trials, const char *what) {
  if (trials < 1) throw ValidationError(std::string(what) + ".trials: must be >= 1");
}

inline void require_truth(const Matrix &truths, Index dim, const char *what) {
  if (truths.rows() < 1) throw ValidationError(std::string(what) + ": truth set is empty");
  require_dim(dim, truths.cols(), what);
  if (!truths.allFinite()) throw ValidationError(std::string(what) + ": non-finite truth values");
}

// Stream indices inside one trial.
enum TrialStream : std::uint64_t { kDegrade = 0, kAlbum = 1, kConstrain = 2, kRestore = 3 };

} // namespace detail

// ---------------------------------------------------------------------------
// Noise step K, with and without generative-album constraining.

struct KSweepConfig {
  std::vector<int> k_grid{100, 200, 300, 400, 500, 600};
  int trials = 200;
  bool unconstrained = true;
  bool constrained = true;
  AlbumConfig album;
  ConstrainConfig constrain = ConstrainConfig::for_album(AlbumSource::generative, 16);
  SamplerKind sampler = SamplerKind::ddpm;
  std::uint64_t seed = 0;
  std::uint64_t feature_seed = 0;
  int jobs = 1;

  void validate(int T) const {
    detail::require_trials(trials, "ablate_k");
    if (k_grid.empty()) throw ValidationError("ablate_k.k_grid: empty");
    for (int K : k_grid) {
      if (K < 0 || K > T) throw ValidationError("ablate_k.k_grid: K=" + std::to_string(K) + " outside [0, T]");
    }
    if (!unconstrained && !constrained) throw ValidationError("ablate_k: no arm selected");
    if (constrained) {
      album.validate(T);
      constrain.validate();
      if (constrain.em.num_components > album.size) {
        throw ValidationError("ablate_k: constrain components exceed album size");
      }
    }
  }
};

inline const std::vector<std::string> &k_sweep_metrics() {
  static const std::vector<std::string> m{"fidelity_l2", "loglik_mean", "identity", "frechet"};
  return m;
}

/// Trial i restores degrade(truth row i mod N). Metrics per (K, arm):
/// fidelity_l2 = |restored - x0|, loglik_mean = log p_base(restored),
/// identity = identity_score(restored, {x0}), frechet of restored vs truth rows.
inline SweepData ablate_k(const DiffusionModel &base, const Matrix &truths, const DegradationOp &op,
                          const KSweepConfig &config) {
  config.validate(base.schedule().steps());
  detail::require_truth(truths, base.dim(), "ablate_k");
  require_dim(base.dim(), op.matrix.rows(), "ablate_k degradation output");
  const auto n = static_cast<std::size_t>(config.trials);
  const Index d = base.dim();
  std::vector<std::string> arms;
  if (config.unconstrained) arms.emplace_back("unconstrained");
  if (config.constrained) arms.emplace_back("constrained");

  SweepData data("K");
  const FeatureMap phi(d, config.feature_seed);
  std::map<std::pair<int, std::string>, Matrix> restored_sets;
  for (int K : config.k_grid) {
    for (const auto &arm : arms) {
      for (const auto &m : {"fidelity_l2", "loglik_mean", "identity"}) data.series(K, arm, m, n);
      restored_sets[{K, arm}] = Matrix(static_cast<Index>(n), d);
    }
  }
  Matrix truth_set(static_cast<Index>(n), d);

  parallel_for(n, config.jobs, [&](std::size_t i) {
    const std::uint64_t trial_seed = derive_seed(config.seed, i);
    const Vector x0 = truths.row(static_cast<Index>(i % static_cast<std::size_t>(truths.rows()))).transpose();
    truth_set.row(static_cast<Index>(i)) = x0.transpose();
    RandomStream deg_rng(derive_seed(trial_seed, detail::kDegrade));
    const Vector y0 = degrade(x0, op, deg_rng);
    const Matrix truth_album = x0.transpose();

    std::optional<DiffusionModel> constrained_model;
    if (config.constrained) {
      RandomStream album_rng(derive_seed(trial_seed, detail::kAlbum));
      const Album album = generate_album(base, y0, config.album, album_rng);
      RandomStream em_rng(derive_seed(trial_seed, detail::kConstrain));
      constrained_model.emplace(constrain_prior(base.prior(), album, config.constrain, em_rng).prior,
                                base.schedule());
    }
    for (int K : config.k_grid) {
      for (const auto &arm : arms) {
        const DiffusionModel &model = arm == "constrained" ? *constrained_model : base;
        RandomStream rng(derive_seed(trial_seed, detail::kRestore));
        RestorationConfig rc;
        rc.K = K;
        rc.sampler = config.sampler;
        const Vector x = restore(model, y0, rc, rng).restored;
        restored_sets.at({K, arm}).row(static_cast<Index>(i)) = x.transpose();
        data.slot(K, arm, "fidelity_l2")[i] = (x - x0).norm();
        data.slot(K, arm, "loglik_mean")[i] = log_density(base.prior(), x);
        data.slot(K, arm, "identity")[i] = identity_score(x, truth_album, phi);
      }
    }
  });

  std::uint64_t set_index = 0;
  for (int K : config.k_grid) {
    for (const auto &arm : arms) {
      for (const auto &m : {"fidelity_l2", "loglik_mean", "identity"}) data.add_row(K, arm, m, n);
      const auto [fd, se] = detail::frechet_with_bootstrap(restored_sets.at({K, arm}), truth_set,
                                                           derive_seed(config.seed ^ 0x46524543ull, set_index++));
      data.add_row({K, arm, "frechet", fd, se, static_cast<int>(n)});
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// Skip-guidance frequency: guided vs unguided generative albums.

struct SkipSweepConfig {
  std::vector<int> skip_grid{1, 5, 20, 50, 200};
  int trials = 20;
  AlbumConfig album;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate(int T) const {
    detail::require_trials(trials, "ablate_skip");
    if (skip_grid.empty()) throw ValidationError("ablate_skip.skip_grid: empty");
    for (int s : skip_grid) {
      if (s < 1) throw ValidationError("ablate_skip.skip_grid: skip_n must be >= 1");
    }
    album.validate(T);
  }
};

/// Trial i builds one album per skip_n (guided) and one with lambda = 0
/// (unguided) from the same observation and album seed. Metrics are album
/// means: divergence = |y0 - sample|, fidelity_l2 = |x0 - sample|,
/// loglik_mean = log p_base(sample).
inline SweepData ablate_skip(const DiffusionModel &base, const Matrix &truths, const DegradationOp &op,
                             const SkipSweepConfig &config) {
  config.validate(base.schedule().steps());
  detail::require_truth(truths, base.dim(), "ablate_skip");
  require_dim(base.dim(), op.matrix.rows(), "ablate_skip degradation output");
  const auto n = static_cast<std::size_t>(config.trials);
  const std::vector<std::string> metrics{"divergence", "fidelity_l2", "loglik_mean"};
  SweepData data("skip_n");
  for (int s : config.skip_grid) {
    for (const auto &arm : {"guided", "unguided"}) {
      for (const auto &m : metrics) data.series(s, arm, m, n);
    }
  }

  auto album_metrics = [&](const Album &album, const Vector &x0, const Vector &y0) {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (Index r = 0; r < album.size(); ++r) {
      const Vector s = album.samples.row(r).transpose();
      out[0] += (y0 - s).norm();
      out[1] += (x0 - s).norm();
      out[2] += log_density(base.prior(), s);
    }
    for (double &v : out) v /= static_cast<double>(album.size());
    return out;
  };

  parallel_for(n, config.jobs, [&](std::size_t i) {
    const std::uint64_t trial_seed = derive_seed(config.seed, i);
    const Vector x0 = truths.row(static_cast<Index>(i % static_cast<std::size_t>(truths.rows()))).transpose();
    RandomStream deg_rng(derive_seed(trial_seed, detail::kDegrade));
    const Vector y0 = degrade(x0, op, deg_rng);

    AlbumConfig unguided = config.album;
    unguided.guidance.lambda = 0.0;
    RandomStream u_rng(derive_seed(trial_seed, detail::kAlbum));
    const auto u = album_metrics(generate_album(base, y0, unguided, u_rng), x0, y0);
    for (int s : config.skip_grid) {
      AlbumConfig guided = config.album;
      guided.guidance.skip_n = s;
      RandomStream g_rng(derive_seed(trial_seed, detail::kAlbum));
      const auto g = album_metrics(generate_album(base, y0, guided, g_rng), x0, y0);
      for (std::size_t m = 0; m < metrics.size(); ++m) {
        data.slot(s, "guided", metrics[m])[i] = g[m];
        data.slot(s, "unguided", metrics[m])[i] = u[m];
      }
    }
  });

  for (int s : config.skip_grid) {
    for (const auto &arm : {"guided", "unguided"}) {
      for (const auto &m : metrics) data.add_row(s, arm, m, n);
    }
  }
  return data;
}

// ---------------------------------------------------------------------------
// Personal-album size.

struct AlbumSizeSweepConfig {
  std::vector<int> sizes{1, 4, 8, 16};
  int trials = 100;
  int K = 200;
  SamplerKind sampler = SamplerKind::ddpm;
  /// Also restore with the unconstrained base prior (reported as album_size 0, arm "base").
  bool include_base = true;
  std::uint64_t seed = 0;
  std::uint64_t feature_seed = 0;
  int jobs = 1;

  void validate(int T, Index pool_size) const {
    detail::require_trials(trials, "ablate_album_size");
    if (sizes.empty()) throw ValidationError("ablate_album_size.sizes: empty");
    for (int s : sizes) {
      if (s < 1 || s > pool_size) {
        throw ValidationError("ablate_album_size.sizes: size " + std::to_string(s) + " outside [1, " +
                              std::to_string(pool_size) + "] (anchor pool size)");
      }
    }
    if (K < 0 || K > T) throw ValidationError("ablate_album_size.K: outside [0, T]");
  }
};

/// Trial i shuffles the anchor pool and uses its first s rows as the personal
/// album for every size s (nested albums). Metrics per size:
/// identity = identity_score(restored, {x0}), identity_anchors =
/// identity_score(restored, full pool), fidelity_l2, loglik_mean (base prior).
inline SweepData ablate_album_size(const DiffusionModel &base, const Matrix &pool, const Matrix &truths,
                                   const DegradationOp &op, const AlbumSizeSweepConfig &config) {
  config.validate(base.schedule().steps(), pool.rows());
  detail::require_truth(truths, base.dim(), "ablate_album_size");
  detail::require_truth(pool, base.dim(), "ablate_album_size anchors");
  require_dim(base.dim(), op.matrix.rows(), "ablate_album_size degradation output");
  const auto n = static_cast<std::size_t>(config.trials);
  const std::vector<std::string> metrics{"identity", "identity_anchors", "fidelity_l2", "loglik_mean"};
  std::vector<std::pair<int, std::string>> cells;
  if (config.include_base) cells.emplace_back(0, "base");
  for (int s : config.sizes) cells.emplace_back(s, "personal");
  SweepData data("album_size");
  for (const auto &[s, arm] : cells) {
    for (const auto &m : metrics) data.series(s, arm, m, n);
  }
  const FeatureMap phi(base.dim(), config.feature_seed);

  parallel_for(n, config.jobs, [&](std::size_t i) {
    const std::uint64_t trial_seed = derive_seed(config.seed, i);
    const Vector x0 = truths.row(static_cast<Index>(i % static_cast<std::size_t>(truths.rows()))).transpose();
    RandomStream deg_rng(derive_seed(trial_seed, detail::kDegrade));
    const Vector y0 = degrade(x0, op, deg_rng);
    const Matrix truth_album = x0.transpose();

    RandomStream perm_rng(derive_seed(trial_seed, detail::kAlbum));
    std::vector<Index> order(static_cast<std::size_t>(pool.rows()));
    for (std::size_t r = 0; r < order.size(); ++r) order[r] = static_cast<Index>(r);
    for (std::size_t r = order.size(); r > 1; --r) {
      std::swap(order[r - 1], order[perm_rng.next_u64() % r]);
    }

    for (const auto &[s, arm] : cells) {
      std::optional<DiffusionModel> personal;
      if (s > 0) {
        Album album;
        album.source = AlbumSource::personal;
        album.samples.resize(s, base.dim());
        for (int r = 0; r < s; ++r) album.samples.row(r) = pool.row(order[static_cast<std::size_t>(r)]);
        RandomStream em_rng(derive_seed(trial_seed, detail::kConstrain));
        const auto cfg = ConstrainConfig::for_album(AlbumSource::personal, s);
        personal.emplace(constrain_prior(base.prior(), album, cfg, em_rng).prior, base.schedule());
      }
      RandomStream rng(derive_seed(trial_seed, detail::kRestore));
      RestorationConfig rc;
      rc.K = config.K;
      rc.sampler = config.sampler;
      const Vector x = restore(personal ? *personal : base, y0, rc, rng).restored;
      const std::array<double, 4> values{identity_score(x, truth_album, phi), identity_score(x, pool, phi),
                                         (x - x0).norm(), log_density(base.prior(), x)};
      for (std::size_t m = 0; m < metrics.size(); ++m) {
        data.slot(s, arm, metrics[m])[i] = values[m];
      }
    }
  });

  for (const auto &[s, arm] : cells) {
    for (const auto &m : metrics) data.add_row(s, arm, m, n);
  }
  return data;
}

} // namespace genrestore
