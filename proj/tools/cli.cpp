#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

namespace genrestore::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

NoiseSchedule schedule_from(const std::string &path) {
  return path.empty() ? default_schedule() : io::read_schedule(path);
}

std::vector<int> parse_grid(const std::string &text, const char *flag) {
  std::vector<int> out;
  auto to_int = [&](const std::string &s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ValidationError(std::string(flag) + ": cannot parse '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::istringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw ValidationError(std::string(flag) + ": expected start:stop:step");
    const int a = to_int(parts[0]), b = to_int(parts[1]), s = to_int(parts[2]);
    if (s <= 0 || b < a) throw ValidationError(std::string(flag) + ": need step > 0 and stop >= start");
    for (int v = a; v <= b; v += s) out.push_back(v);
  } else {
    std::istringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ',')) out.push_back(to_int(p));
  }
  if (out.empty()) throw ValidationError(std::string(flag) + ": empty grid");
  return out;
}

void require_at_least(long long value, long long min, const char *flag) {
  if (value < min) {
    throw ValidationError(std::string(flag) + ": must be >= " + std::to_string(min) + " (got " +
                          std::to_string(value) + ")");
  }
}

fs::path manifest_beside(const fs::path &out) {
  fs::path p = out;
  p.replace_extension(".manifest.json");
  return p;
}

std::string sweep_csv(const SweepData &data) {
  std::string s = data.param_name() + ",arm,metric,mean,stderr,trials\n";
  for (const auto &r : data.rows()) {
    s += std::to_string(r.param) + "," + r.arm + "," + r.metric + "," + io::format_double(r.mean) + "," +
         io::format_double(r.stderr_) + "," + std::to_string(r.trials) + "\n";
  }
  return s;
}

Json guidance_json(const GuidanceConfig &g) {
  return {{"lambda", g.lambda}, {"skip_n", g.skip_n}, {"jacobian_mode", to_string(g.jacobian_mode)}};
}

/// Everything a command needs besides its own options.
struct Context {
  std::vector<std::string> argv;
  std::ostream &out;
  std::ostream &err;
};

void emit_manifest(const Context &ctx, const fs::path &path, io::RunManifest m) {
  m.argv = ctx.argv;
  io::write_json(path, m.to_json());
}

// ---------------------------------------------------------------------------

struct CommonOptions {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string schedule;
  std::string manifest;
};

void add_common(CLI::App *sub, CommonOptions &c, bool with_schedule = true) {
  sub->add_option("--seed", c.seed, "Master RNG seed");
  sub->add_option("--jobs", c.jobs, "Worker threads for independent trials/samples");
  if (with_schedule) sub->add_option("--schedule", c.schedule, "Schedule JSON (default: linear, T=1000)");
  sub->add_option("--manifest", c.manifest, "Manifest path (default derived from the output path)");
}

fs::path manifest_path(const CommonOptions &c, const fs::path &fallback) {
  return c.manifest.empty() ? fallback : fs::path(c.manifest);
}

std::vector<std::string> output_flags(const CommonOptions &c, std::vector<std::string> flags) {
  if (!c.manifest.empty()) flags.emplace_back("--manifest");
  return flags;
}

// ---------------------------------------------------------------------------
// fit-prior

struct FitPriorOptions {
  CommonOptions common;
  std::string data;
  std::string out;
  int components = 4;
  int max_iters = 500;
  double tol = 1e-9;
  double floor = kDefaultCovarianceFloor;
  std::string init = "kmeans_pp";
  std::string init_prior;
};

int cmd_fit_prior(const FitPriorOptions &o, const Context &ctx) {
  require_at_least(o.components, 1, "--components");
  require_at_least(o.max_iters, 1, "--max-iters");
  EmConfig cfg;
  cfg.num_components = o.components;
  cfg.max_iters = o.max_iters;
  cfg.log_lik_tol = o.tol;
  cfg.covariance_floor = o.floor;
  if (o.init == "kmeans_pp") {
    cfg.init_mode = EmInit::kmeans_pp;
  } else if (o.init == "from_prior") {
    cfg.init_mode = EmInit::from_prior;
  } else {
    throw ValidationError("--init: expected kmeans_pp or from_prior");
  }
  cfg.validate();
  const Matrix data = io::read_samples(o.data);
  std::optional<MixturePrior> init;
  if (!o.init_prior.empty()) init = io::read_prior(o.init_prior);
  RandomStream rng(o.common.seed);
  const EmResult fit = fit_em(data, cfg, init, rng);
  io::write_prior(o.out, fit.prior);
  ctx.out << "fit-prior: " << fit.iterations << " iterations, converged=" << (fit.converged ? "yes" : "no")
          << ", mean log-likelihood " << fit.log_lik_trace.back() << "\n";

  io::RunManifest m;
  m.command = "fit-prior";
  m.seed = o.common.seed;
  m.output_flags = output_flags(o.common, {"--out"});
  m.config = {{"components", o.components}, {"max_iters", o.max_iters}, {"tol", o.tol},
              {"floor", o.floor},           {"init", o.init},           {"iterations", fit.iterations},
              {"converged", fit.converged}};
  m.inputs.push_back({"data", o.data});
  if (!o.init_prior.empty()) m.inputs.push_back({"init_prior", o.init_prior});
  m.artifacts.emplace_back(o.out);
  emit_manifest(ctx, manifest_path(o.common, manifest_beside(o.out)), m);
  return kSuccess;
}

// ---------------------------------------------------------------------------
// synth-prior

struct SynthPriorOptions {
  CommonOptions common;
  std::string name = "mixture-2d";
  std::string out;
};

int cmd_synth_prior(const SynthPriorOptions &o, const Context &ctx) {
  io::write_prior(o.out, reference::by_name(o.name));
  io::RunManifest m;
  m.command = "synth-prior";
  m.seed = o.common.seed;
  m.output_flags = output_flags(o.common, {"--out"});
  m.config = {{"name", o.name}};
  m.artifacts.emplace_back(o.out);
  emit_manifest(ctx, manifest_path(o.common, manifest_beside(o.out)), m);
  ctx.out << "synth-prior: wrote " << o.name << " to " << o.out << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// sample

struct SampleOptions {
  CommonOptions common;
  std::string prior;
  std::string out;
  int count = 1000;
  std::string sampler = "direct";
  double eta = 0.0;
};

int cmd_sample(const SampleOptions &o, const Context &ctx) {
  require_at_least(o.count, 1, "--count");
  const MixturePrior prior = io::read_prior(o.prior);
  Matrix out;
  if (o.sampler == "direct") {
    RandomStream rng(o.common.seed);
    out = sample(prior, o.count, rng);
  } else {
    const SamplerKind kind = parse_sampler(o.sampler);
    if (!(o.eta >= 0.0 && o.eta <= 1.0)) throw ValidationError("--eta: must lie in [0,1]");
    const DiffusionModel model(prior, schedule_from(o.common.schedule));
    const int T = model.schedule().steps();
    out.resize(o.count, prior.dim());
    parallel_for(static_cast<std::size_t>(o.count), o.common.jobs, [&](std::size_t i) {
      RandomStream rng(derive_seed(o.common.seed, i));
      const Vector xT = rng.normal_vector(prior.dim());
      out.row(static_cast<Index>(i)) = denoise_from(model, xT, T, kind, rng, {}, o.eta).transpose();
    });
  }
  io::write_samples(o.out, out);
  io::RunManifest m;
  m.command = "sample";
  m.seed = o.common.seed;
  m.output_flags = output_flags(o.common, {"--out"});
  m.config = {{"count", o.count}, {"sampler", o.sampler}, {"eta", o.eta}};
  m.inputs.push_back({"prior", o.prior});
  if (!o.common.schedule.empty()) m.inputs.push_back({"schedule", o.common.schedule});
  m.artifacts.emplace_back(o.out);
  emit_manifest(ctx, manifest_path(o.common, manifest_beside(o.out)), m);
  ctx.out << "sample: wrote " << o.count << " samples to " << o.out << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// degrade

struct DegradeOptions {
  CommonOptions common;
  std::string input;
  std::string op;
  std::string kind;
  double width = 1.0;
  int stride = 1;
  double sigma = 0.0;
  std::string save_op;
  std::string out;
};

int cmd_degrade(const DegradeOptions &o, const Context &ctx) {
  const Matrix x = io::read_samples(o.input);
  DegradationOp op;
  if (!o.op.empty()) {
    if (!o.kind.empty()) throw ValidationError("--op and --kind are mutually exclusive");
    op = io::read_degradation(o.op);
  } else {
    if (o.kind.empty()) throw ValidationError("degrade: one of --op or --kind is required");
    DegradationParams p;
    p.dim = x.cols();
    p.width = o.width;
    p.stride = o.stride;
    p.sigma = o.sigma;
    op = make_degradation(parse_degradation_kind(o.kind), p);
  }
  require_dim(op.matrix.cols(), x.cols(), "degrade");
  Matrix y(x.rows(), op.matrix.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    RandomStream rng(derive_seed(o.common.seed, static_cast<std::uint64_t>(r)));
    y.row(r) = degrade(x.row(r).transpose(), op, rng).transpose();
  }
  io::write_samples(o.out, y);
  io::RunManifest m;
  m.command = "degrade";
  m.seed = o.common.seed;
  m.output_flags = output_flags(o.common, {"--out", "--save-op"});
  m.config = {{"degradation", io::degradation_to_json(op)}};
  m.inputs.push_back({"input", o.input});
  if (!o.op.empty()) m.inputs.push_back({"op", o.op});
  m.artifacts.emplace_back(o.out);
  if (!o.save_op.empty()) {
    io::write_json(o.save_op, io::degradation_to_json(op));
    m.artifacts.emplace_back(o.save_op);
  }
  emit_manifest(ctx, manifest_path(o.common, manifest_beside(o.out)), m);
  ctx.out << "degrade: " << x.rows() << " rows, " << to_string(op.kind) << ", sigma " << op.noise_sigma << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// album

struct GuidanceOptions {
  int album_K = 600;
  int album_size = 16;
  int skip_n = 20;
  double lambda = 0.1;
  std::string jacobian = "identity";
};

void add_guidance(CLI::App *sub, GuidanceOptions &g) {
  sub->add_option("--album-K", g.album_K, "Noise step for album generation");
  sub->add_option("--album-size", g.album_size, "Album size M");
  sub->add_option("--skip-n", g.skip_n, "Guidance fires every n reverse steps");
  sub->add_option("--lambda", g.lambda, "Guidance strength");
  sub->add_option("--jacobian", g.jacobian, "Guidance Jacobian: identity or exact");
}

AlbumConfig album_config(const GuidanceOptions &g, SamplerKind sampler) {
  require_at_least(g.album_size, 1, "--album-size");
  require_at_least(g.skip_n, 1, "--skip-n");
  if (!(g.lambda >= 0.0)) throw ValidationError("--lambda: must be >= 0");
  AlbumConfig a;
  a.K_album = g.album_K;
  a.size = g.album_size;
  a.guidance.lambda = g.lambda;
  a.guidance.skip_n = g.skip_n;
  a.guidance.jacobian_mode = parse_jacobian_mode(g.jacobian);
  a.sampler = sampler;
  return a;
}

struct AlbumOptions {
  CommonOptions common;
  GuidanceOptions guidance;
  std::string prior;
  std::string observation;
  int row = 0;
  std::string sampler = "ddpm";
  std::string out;
};

int cmd_album(const AlbumOptions &o, const Context &ctx) {
  const AlbumConfig cfg = album_config(o.guidance, parse_sampler(o.sampler));
  const DiffusionModel model(io::read_prior(o.prior), schedule_from(o.common.schedule));
  cfg.validate(model.schedule().steps());
  const Matrix y = io::read_samples(o.observation);
  if (o.row < 0 || o.row >= y.rows()) throw ValidationError("--row: outside the observation file");
  RandomStream rng(o.common.seed);
  const Album album = generate_album(model, y.row(o.row).transpose(), cfg, rng, o.common.jobs,
                                     fs::path(o.observation).filename().string() + "#" + std::to_string(o.row));
  io::write_album(o.out, album);
  io::RunManifest m;
  m.command = "album";
  m.seed = o.common.seed;
  m.output_flags = output_flags(o.common, {"--out"});
  m.config = {{"K_album", cfg.K_album}, {"size", cfg.size}, {"guidance", guidance_json(cfg.guidance)},
              {"sampler", o.sampler},   {"row", o.row}};
  m.inputs.push_back({"prior", o.prior});
  m.inputs.push_back({"observation", o.observation});
  if (!o.common.schedule.empty()) m.inputs.push_back({"schedule", o.common.schedule});
  m.artifacts.emplace_back(o.out);
  m.artifacts.push_back(io::album_sidecar(o.out));
  emit_manifest(ctx, manifest_path(o.common, manifest_beside(o.out)), m);
  ctx.out << "album: " << album.size() << " samples to " << o.out << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// constrain

struct ConstrainOptions {
  CommonOptions common;
  std::string prior;
  std::string album;
  int components = 0;
  double blend = -1.0;
  int max_iters = 500;
  double tol = 1e-9;
  double floor = kDefaultCovarianceFloor;
  std::string out;
  std::string report;
};

int cmd_constrain(const ConstrainOptions &o, const Context &ctx) {
  const MixturePrior base = io::read_prior(o.prior);
  const Album album = io::read_album(o.album);
  ConstrainConfig cfg = ConstrainConfig::for_album(album.source, album.size());
  if (o.components != 0) {
    require_at_least(o.components, 1, "--components");
    cfg.em.num_components = o.components;
  }
  if (o.blend >= 0.0) cfg.base_blend = o.blend;
  cfg.em.max_iters = o.max_iters;
  cfg.em.log_lik_tol = o.tol;
  cfg.em.covariance_floor = o.floor;
  cfg.validate();
  RandomStream rng(o.common.seed);
  const ConstrainResult r = constrain_prior(base, album, cfg, rng);
  io::write_prior(o.out, r.prior);
  const fs::path report = o.report.empty() ? fs::path(o.out).replace_extension(".report.json") : fs::path(o.report);
  io::write_json(report, {{"album_loglik_base", r.album_loglik_base},
                          {"album_loglik_result", r.album_loglik_result},
                          {"iterations", r.fit.iterations},
                          {"converged", r.fit.converged},
                          {"components", cfg.em.num_components},
                          {"base_blend", cfg.base_blend}});
  io::RunManifest m;
  m.command = "constrain";
  m.seed = o.common.seed;
  m.output_flags = output_flags(o.common, {"--out", "--report"});
  m.config = {{"components", cfg.em.num_components}, {"base_blend", cfg.base_blend}, {"max_iters", o.max_iters},
              {"tol", o.tol}, {"floor", o.floor}, {"source", to_string(album.source)}};
  m.inputs.push_back({"prior", o.prior});
  m.inputs.push_back({"album", o.album});
  m.artifacts.emplace_back(o.out);
  m.artifacts.push_back(report);
  emit_manifest(ctx, manifest_path(o.common, manifest_beside(o.out)), m);
  ctx.out << "constrain: album log-likelihood " << r.album_loglik_base << " -> " << r.album_loglik_result << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// restore

struct RestoreOptions {
  CommonOptions common;
  std::string prior;
  std::string observations;
  int K = 200;
  std::string sampler = "ddpm";
  std::string trajectory;
  std::string out;
};

int cmd_restore(const RestoreOptions &o, const Context &ctx) {
  const DiffusionModel model(io::read_prior(o.prior), schedule_from(o.common.schedule));
  RestorationConfig cfg;
  cfg.K = o.K;
  cfg.sampler = parse_sampler(o.sampler);
  cfg.seed = o.common.seed;
  cfg.record_trajectory = !o.trajectory.empty();
  cfg.validate(model.schedule().steps());
  const Matrix y = io::read_samples(o.observations);
  require_dim(model.dim(), y.cols(), "restore observations");
  Matrix restored(y.rows(), y.cols());
  std::vector<std::vector<SampleState>> trajectories(static_cast<std::size_t>(y.rows()));
  parallel_for(static_cast<std::size_t>(y.rows()), o.common.jobs, [&](std::size_t i) {
    RandomStream rng(derive_seed(o.common.seed, i));
    RestorationResult r = restore(model, y.row(static_cast<Index>(i)).transpose(), cfg, rng);
    restored.row(static_cast<Index>(i)) = r.restored.transpose();
    if (r.trajectory) trajectories[i] = std::move(*r.trajectory);
  });
  io::write_samples(o.out, restored);
  io::RunManifest m;
  m.command = "restore";
  m.seed = o.common.seed;
  m.output_flags = output_flags(o.common, {"--out", "--trajectory"});
  m.config = {{"K", cfg.K}, {"sampler", o.sampler}};
  m.inputs.push_back({"prior", o.prior});
  m.inputs.push_back({"observations", o.observations});
  if (!o.common.schedule.empty()) m.inputs.push_back({"schedule", o.common.schedule});
  m.artifacts.emplace_back(o.out);
  if (!o.trajectory.empty()) {
    std::string csv = "row,t";
    for (Index c = 0; c < y.cols(); ++c) csv += ",x" + std::to_string(c);
    csv += "\n";
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      for (const auto &s : trajectories[i]) {
        csv += std::to_string(i) + "," + std::to_string(s.t);
        for (Index c = 0; c < s.x.size(); ++c) csv += "," + io::format_double(s.x[c]);
        csv += "\n";
      }
    }
    io::write_text(o.trajectory, csv);
    m.artifacts.emplace_back(o.trajectory);
  }
  emit_manifest(ctx, manifest_path(o.common, manifest_beside(o.out)), m);
  ctx.out << "restore: " << y.rows() << " rows at K=" << cfg.K << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// restore-e2e

void add_restore_e2e(CLI::App *sub, RestoreE2EOptions &o) {
  sub->add_option("prior", o.prior, "Base prior JSON")->required();
  sub->add_option("observations", o.observations, "Degraded observations CSV")->required();
  sub->add_option("--outdir", o.outdir, "Output directory")->required();
  sub->add_option("--schedule", o.schedule, "Schedule JSON (default: linear, T=1000)");
  sub->add_option("--K", o.K, "Inference noise step");
  sub->add_option("--album-K", o.album_K, "Noise step for album generation");
  sub->add_option("--album-size", o.album_size, "Generative album size");
  sub->add_option("--skip-n", o.skip_n, "Guidance fires every n reverse steps");
  sub->add_option("--lambda", o.lambda, "Guidance strength");
  sub->add_option("--jacobian", o.jacobian, "Guidance Jacobian: identity or exact");
  sub->add_option("--sampler", o.sampler, "Reverse sampler: ddpm, exact or ddim");
  sub->add_option("--blend", o.blend, "Weight on the base prior after constraining");
  sub->add_option("--seed", o.seed, "Master RNG seed");
  sub->add_option("--jobs", o.jobs, "Worker threads for album members");
}

int cmd_restore_e2e(const RestoreE2EOptions &o, const std::string &manifest, const Context &ctx) {
  const NoiseSchedule schedule = schedule_from(o.schedule);
  const int T = schedule.steps();
  const SamplerKind sampler = parse_sampler(o.sampler);
  GuidanceOptions g{o.album_K, o.album_size, o.skip_n, o.lambda, o.jacobian};
  const AlbumConfig album_cfg = album_config(g, sampler);
  album_cfg.validate(T);
  ConstrainConfig constrain_cfg = ConstrainConfig::for_album(AlbumSource::generative, album_cfg.size);
  constrain_cfg.base_blend = o.blend;
  constrain_cfg.validate();
  RestorationConfig cfg;
  cfg.K = o.K;
  cfg.sampler = sampler;
  cfg.seed = o.seed;
  cfg.validate(T);
  const DiffusionModel base(io::read_prior(o.prior), schedule);
  const Matrix y = io::read_samples(o.observations);
  require_dim(base.dim(), y.cols(), "restore-e2e observations");

  const fs::path dir = o.outdir;
  fs::create_directories(dir);
  const bool single = y.rows() == 1;
  auto named = [&](const std::string &stem, const std::string &ext, Index i) {
    return dir / (single ? stem + ext : stem + "_" + std::to_string(i) + ext);
  };
  io::RunManifest m;
  m.command = "restore-e2e";
  m.seed = o.seed;
  m.output_flags = {"--outdir"};
  m.config = {{"T", T},
              {"K", cfg.K},
              {"album_K", album_cfg.K_album},
              {"album_size", album_cfg.size},
              {"guidance", guidance_json(album_cfg.guidance)},
              {"sampler", o.sampler},
              {"base_blend", constrain_cfg.base_blend},
              {"em_components", constrain_cfg.em.num_components}};
  m.inputs.push_back({"prior", o.prior});
  m.inputs.push_back({"observations", o.observations});
  if (!o.schedule.empty()) m.inputs.push_back({"schedule", o.schedule});

  Matrix restored(y.rows(), y.cols());
  for (Index i = 0; i < y.rows(); ++i) {
    RandomStream rng(derive_seed(o.seed, static_cast<std::uint64_t>(i)));
    const SingleImageRestoration r =
        restore_single_image(base, y.row(i).transpose(), album_cfg, constrain_cfg, cfg, rng, o.jobs);
    restored.row(i) = r.result.restored.transpose();
    const fs::path album_path = named("album", ".csv", i);
    const fs::path prior_path = named("constrained_prior", ".json", i);
    Album album = r.album;
    if (album.provenance) album.provenance->observation_id = fs::path(o.observations).filename().string() + "#" +
                                                              std::to_string(i);
    io::write_album(album_path, album);
    io::write_prior(prior_path, r.constrained.prior);
    m.artifacts.push_back(album_path);
    m.artifacts.push_back(io::album_sidecar(album_path));
    m.artifacts.push_back(prior_path);
  }
  const fs::path restored_path = dir / "restored.csv";
  io::write_samples(restored_path, restored);
  m.artifacts.push_back(restored_path);
  emit_manifest(ctx, manifest.empty() ? dir / "manifest.json" : fs::path(manifest), m);
  ctx.out << "restore-e2e: " << y.rows() << " observations restored into " << dir.string() << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepCommon {
  CommonOptions common;
  std::string prior;
  std::string truth;
  std::string degradation;
  std::string sampler = "ddpm";
  std::uint64_t feature_seed = 0;
  std::string out;
};

void add_sweep_common(CLI::App *sub, SweepCommon &s) {
  sub->add_option("prior", s.prior, "Base prior JSON")->required();
  sub->add_option("truth", s.truth, "Clean ground-truth samples CSV")->required();
  sub->add_option("degradation", s.degradation, "Degradation JSON")->required();
  sub->add_option("--sampler", s.sampler, "Reverse sampler: ddpm, exact or ddim");
  sub->add_option("--feature-seed", s.feature_seed, "Seed of the identity feature map");
  sub->add_option("--out", s.out, "Sweep CSV")->required();
  add_common(sub, s.common);
}

void finish_sweep(const SweepCommon &s, const Context &ctx, const SweepData &data, const std::string &command,
                  Json config, const std::vector<io::ManifestInput> &extra_inputs = {}) {
  io::write_text(s.out, sweep_csv(data));
  io::RunManifest m;
  m.command = command;
  m.seed = s.common.seed;
  m.output_flags = output_flags(s.common, {"--out"});
  config["sampler"] = s.sampler;
  config["feature_seed"] = s.feature_seed;
  m.config = std::move(config);
  m.inputs.push_back({"prior", s.prior});
  for (const auto &e : extra_inputs) m.inputs.push_back(e);
  m.inputs.push_back({"truth", s.truth});
  m.inputs.push_back({"degradation", s.degradation});
  if (!s.common.schedule.empty()) m.inputs.push_back({"schedule", s.common.schedule});
  m.artifacts.emplace_back(s.out);
  emit_manifest(ctx, manifest_path(s.common, manifest_beside(s.out)), m);
  ctx.out << command << ": " << data.rows().size() << " rows to " << s.out << "\n";
}

struct AblateKOptions {
  SweepCommon sweep;
  GuidanceOptions guidance;
  std::string k_grid = "100:600:100";
  int trials = 200;
  std::string constrained = "both";
};

int cmd_ablate_k(const AblateKOptions &o, const Context &ctx) {
  const auto &s = o.sweep;
  require_at_least(o.trials, 1, "--trials");
  KSweepConfig cfg;
  cfg.k_grid = parse_grid(o.k_grid, "--k-grid");
  cfg.trials = o.trials;
  if (o.constrained == "on") {
    cfg.unconstrained = false;
  } else if (o.constrained == "off") {
    cfg.constrained = false;
  } else if (o.constrained != "both") {
    throw ValidationError("--constrained: expected on, off or both");
  }
  cfg.sampler = parse_sampler(s.sampler);
  cfg.album = album_config(o.guidance, cfg.sampler);
  cfg.constrain = ConstrainConfig::for_album(AlbumSource::generative, cfg.album.size);
  cfg.seed = s.common.seed;
  cfg.feature_seed = s.feature_seed;
  cfg.jobs = s.common.jobs;
  const DiffusionModel model(io::read_prior(s.prior), schedule_from(s.common.schedule));
  cfg.validate(model.schedule().steps());
  const SweepData data = ablate_k(model, io::read_samples(s.truth), io::read_degradation(s.degradation), cfg);
  finish_sweep(s, ctx, data, "ablate-k",
               {{"k_grid", cfg.k_grid}, {"trials", cfg.trials}, {"constrained", o.constrained},
                {"K_album", cfg.album.K_album}, {"album_size", cfg.album.size},
                {"guidance", guidance_json(cfg.album.guidance)}});
  return kSuccess;
}

struct AblateSkipOptions {
  SweepCommon sweep;
  GuidanceOptions guidance;
  std::string skip_grid = "1,5,20,50,200";
  int trials = 20;
};

int cmd_ablate_skip(const AblateSkipOptions &o, const Context &ctx) {
  const auto &s = o.sweep;
  require_at_least(o.trials, 1, "--trials");
  SkipSweepConfig cfg;
  cfg.skip_grid = parse_grid(o.skip_grid, "--skip-grid");
  cfg.trials = o.trials;
  cfg.album = album_config(o.guidance, parse_sampler(s.sampler));
  cfg.seed = s.common.seed;
  cfg.jobs = s.common.jobs;
  const DiffusionModel model(io::read_prior(s.prior), schedule_from(s.common.schedule));
  cfg.validate(model.schedule().steps());
  const SweepData data = ablate_skip(model, io::read_samples(s.truth), io::read_degradation(s.degradation), cfg);
  finish_sweep(s, ctx, data, "ablate-skip",
               {{"skip_grid", cfg.skip_grid}, {"trials", cfg.trials}, {"K_album", cfg.album.K_album},
                {"album_size", cfg.album.size}, {"lambda", cfg.album.guidance.lambda},
                {"jacobian_mode", to_string(cfg.album.guidance.jacobian_mode)}});
  return kSuccess;
}

struct AblateAlbumSizeOptions {
  SweepCommon sweep;
  std::string anchors;
  std::string sizes = "1,4,8,16";
  int trials = 100;
  int K = 200;
};

int cmd_ablate_album_size(const AblateAlbumSizeOptions &o, const Context &ctx) {
  const auto &s = o.sweep;
  require_at_least(o.trials, 1, "--trials");
  AlbumSizeSweepConfig cfg;
  cfg.sizes = parse_grid(o.sizes, "--sizes");
  cfg.trials = o.trials;
  cfg.K = o.K;
  cfg.sampler = parse_sampler(s.sampler);
  cfg.seed = s.common.seed;
  cfg.feature_seed = s.feature_seed;
  cfg.jobs = s.common.jobs;
  const DiffusionModel model(io::read_prior(s.prior), schedule_from(s.common.schedule));
  const Matrix pool = io::read_samples(o.anchors);
  cfg.validate(model.schedule().steps(), pool.rows());
  const SweepData data =
      ablate_album_size(model, pool, io::read_samples(s.truth), io::read_degradation(s.degradation), cfg);
  finish_sweep(s, ctx, data, "ablate-album-size",
               {{"sizes", cfg.sizes}, {"trials", cfg.trials}, {"K", cfg.K}}, {{"anchors", o.anchors}});
  return kSuccess;
}

// ---------------------------------------------------------------------------
// theory-check

struct TheoryOptions {
  CommonOptions common;
  int T = 1000;
  int grid = 20;
  int dim = 2;
  long long mc_samples = 1'000'000;
  std::string out;
};

/// The 2D reference mixture for dim 2; otherwise two unit-covariance
/// components at -1.5 e1 and +1.5 e1.
MixturePrior theory_reference(Index dim) {
  if (dim == 2) return reference::mixture_2d();
  Vector a = Vector::Zero(dim), b = Vector::Zero(dim);
  a[0] = -1.5;
  b[0] = 1.5;
  const Matrix I = Matrix::Identity(dim, dim);
  return MixturePrior({{0.5, a, I}, {0.5, b, I}});
}

int cmd_theory_check(const TheoryOptions &o, const Context &ctx) {
  require_at_least(o.T, 1, "--T");
  require_at_least(o.grid, 1, "--grid");
  require_at_least(o.dim, 1, "--dim");
  require_at_least(o.mc_samples, 2, "--mc-samples");
  const NoiseSchedule schedule =
      o.common.schedule.empty() ? NoiseSchedule::linear(o.T, 1e-4, 0.02) : io::read_schedule(o.common.schedule);
  TheoryConfig cfg;
  cfg.grid = o.grid;
  cfg.dim = o.dim;
  cfg.seed = o.common.seed;
  cfg.kl_samples = o.mc_samples;
  cfg.entropy_samples = o.mc_samples;
  cfg.validate(schedule.steps());
  const TheoryReport report = theory_check(schedule, theory_reference(o.dim), cfg);
  Json checks = Json::array();
  for (const auto &c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"t", c.t},
                      {"value", c.value},
                      {"reference", c.reference},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
  }
  const bool pass = report.all_pass();
  io::write_json(o.out, {{"T", schedule.steps()},
                         {"grid", report.grid},
                         {"dim", o.dim},
                         {"x0", io::detail::to_json(report.x0)},
                         {"y0", io::detail::to_json(report.y0)},
                         {"checks", checks},
                         {"all_pass", pass}});
  io::RunManifest m;
  m.command = "theory-check";
  m.seed = o.common.seed;
  m.output_flags = output_flags(o.common, {"--out"});
  m.config = {{"T", schedule.steps()}, {"grid", o.grid}, {"dim", o.dim}, {"mc_samples", o.mc_samples}};
  if (!o.common.schedule.empty()) m.inputs.push_back({"schedule", o.common.schedule});
  m.artifacts.emplace_back(o.out);
  emit_manifest(ctx, manifest_path(o.common, manifest_beside(o.out)), m);
  std::size_t failed = 0;
  for (const auto &c : report.checks) failed += c.pass ? 0 : 1;
  ctx.out << "theory-check: " << report.checks.size() - failed << "/" << report.checks.size() << " checks pass\n";
  if (!pass) {
    for (const auto &c : report.checks) {
      if (!c.pass) ctx.err << "  FAIL " << c.name << " t=" << c.t << " value=" << c.value
                           << " reference=" << c.reference << "\n";
    }
    return kCheckFailure;
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  CommonOptions common;
  std::string restored;
  std::string truth;
  std::string prior;
  std::string anchors;
  std::uint64_t feature_seed = 0;
  std::string out;
};

int cmd_eval(const EvalOptions &o, const Context &ctx) {
  const Matrix restored = io::read_samples(o.restored);
  const Matrix truth = io::read_samples(o.truth);
  const MixturePrior prior = io::read_prior(o.prior);
  require_dim(prior.dim(), restored.cols(), "eval restored");
  MetricReport r = evaluate(restored, truth, prior, o.feature_seed);
  std::string identity_reference = "truth";
  if (!o.anchors.empty()) {
    const Album anchors = io::read_album(o.anchors);
    require_dim(restored.cols(), anchors.dim(), "eval anchors");
    const FeatureMap phi(restored.cols(), o.feature_seed);
    r.identity = 0.0;
    for (Index i = 0; i < restored.rows(); ++i) {
      r.identity += identity_score(restored.row(i).transpose(), anchors.samples, phi) /
                    static_cast<double>(restored.rows());
    }
    identity_reference = "anchors";
  }
  io::write_json(o.out, {{"frechet", r.frechet},
                         {"identity", r.identity},
                         {"identity_reference", identity_reference},
                         {"fidelity_l2", r.fidelity_l2},
                         {"loglik_mean", r.loglik_mean},
                         {"rows", static_cast<long long>(restored.rows())}});
  io::RunManifest m;
  m.command = "eval";
  m.seed = o.common.seed;
  m.output_flags = output_flags(o.common, {"--out"});
  m.config = {{"feature_seed", o.feature_seed}};
  m.inputs.push_back({"restored", o.restored});
  m.inputs.push_back({"truth", o.truth});
  m.inputs.push_back({"prior", o.prior});
  if (!o.anchors.empty()) m.inputs.push_back({"anchors", o.anchors});
  m.artifacts.emplace_back(o.out);
  emit_manifest(ctx, manifest_path(o.common, manifest_beside(o.out)), m);
  ctx.out << "eval: frechet " << r.frechet << ", fidelity_l2 " << r.fidelity_l2 << ", identity " << r.identity
          << ", loglik_mean " << r.loglik_mean << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// replay

struct ReplayOptions {
  std::string manifest;
  std::string into;
};

int cmd_replay(const ReplayOptions &o, const Context &ctx) {
  const Json m = io::read_json(o.manifest);
  const std::string src = o.manifest;
  auto strings = [&](const char *key) {
    const Json &j = io::detail::field(m, key, src);
    if (!j.is_array()) throw ValidationError(src + "." + key + ": expected an array");
    std::vector<std::string> v;
    for (const auto &e : j) {
      if (!e.is_string()) throw ValidationError(src + "." + key + ": expected strings");
      v.push_back(e.get<std::string>());
    }
    return v;
  };
  std::vector<std::string> argv = strings("argv");
  const std::vector<std::string> flags = strings("output_flags");
  const Json &digests = io::detail::field(m, "artifact_digests", src);
  if (argv.empty() || argv.front() == "replay") throw ValidationError(src + ".argv: not a replayable command");

  const fs::path into = o.into.empty() ? fs::path(o.manifest).parent_path() / "replay" : fs::path(o.into);
  fs::create_directories(into);
  // Redirect every output flag into `into`, remembering the prefix mapping.
  std::vector<std::pair<std::string, std::string>> remap;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    std::string flag = argv[i], value;
    bool inline_value = false;
    if (auto eq = flag.find('='); flag.rfind("--", 0) == 0 && eq != std::string::npos) {
      value = flag.substr(eq + 1);
      flag = flag.substr(0, eq);
      inline_value = true;
    }
    if (std::find(flags.begin(), flags.end(), flag) == flags.end()) continue;
    if (!inline_value) {
      if (i + 1 >= argv.size()) break;
      value = argv[i + 1];
    }
    const std::string target = (into / fs::path(value).filename()).string();
    remap.emplace_back(value, target);
    if (inline_value) {
      argv[i] = flag + "=" + target;
    } else {
      argv[i + 1] = target;
    }
  }
  std::ostringstream sink;
  const int code = run(argv, sink, ctx.err);
  if (code != kSuccess && code != kCheckFailure) {
    ctx.err << "replay: command exited with code " << code << "\n";
    return code;
  }
  int mismatches = 0;
  for (auto it = digests.begin(); it != digests.end(); ++it) {
    std::string path = it.key();
    for (const auto &[from, to] : remap) {
      if (path.rfind(from, 0) == 0) {
        path = to + path.substr(from.size());
        break;
      }
    }
    const bool same = fs::exists(path) && io::byte_digest(path) == it.value().get<std::string>();
    ctx.out << (same ? "identical  " : "DIFFERENT  ") << it.key() << " -> " << path << "\n";
    mismatches += same ? 0 : 1;
  }
  ctx.out << "replay: " << (mismatches == 0 ? "all artifacts byte-identical" : "artifacts differ") << "\n";
  return mismatches == 0 ? kSuccess : kCheckFailure;
}

// ---------------------------------------------------------------------------

struct Options {
  FitPriorOptions fit_prior;
  SynthPriorOptions synth_prior;
  SampleOptions sample;
  DegradeOptions degrade;
  AlbumOptions album;
  ConstrainOptions constrain;
  RestoreOptions restore;
  RestoreE2EOptions e2e;
  std::string e2e_manifest;
  AblateKOptions ablate_k;
  AblateSkipOptions ablate_skip;
  AblateAlbumSizeOptions ablate_album_size;
  TheoryOptions theory;
  EvalOptions eval;
  ReplayOptions replay;
};

std::unique_ptr<CLI::App> build_app(Options &o) {
  auto app = std::make_unique<CLI::App>("Restoration by generation with analytic Gaussian-mixture diffusion priors",
                                        "genrestore");
  app->require_subcommand(1);

  auto *fit = app->add_subcommand("fit-prior", "Fit a mixture prior to samples with EM");
  fit->add_option("data", o.fit_prior.data, "Samples CSV (header x0..x{d-1})")->required();
  fit->add_option("--components", o.fit_prior.components, "Number of mixture components k");
  fit->add_option("--max-iters", o.fit_prior.max_iters, "EM iteration cap");
  fit->add_option("--tol", o.fit_prior.tol, "Stop when the mean log-likelihood gain is below this");
  fit->add_option("--floor", o.fit_prior.floor, "Covariance eigenvalue floor");
  fit->add_option("--init", o.fit_prior.init, "Initialization: kmeans_pp or from_prior");
  fit->add_option("--init-prior", o.fit_prior.init_prior, "Prior JSON for from_prior initialization");
  fit->add_option("--out", o.fit_prior.out, "Output prior JSON")->required();
  add_common(fit, o.fit_prior.common, false);

  auto *synth = app->add_subcommand("synth-prior", "Write a built-in reference prior");
  synth->add_option("--name", o.synth_prior.name, "mixture-2d, mixture-3c-2d, subjects-4d or subject-<j>");
  synth->add_option("--out", o.synth_prior.out, "Output prior JSON")->required();
  add_common(synth, o.synth_prior.common, false);

  auto *smp = app->add_subcommand("sample", "Draw samples from a prior directly or by full reverse chains");
  smp->add_option("prior", o.sample.prior, "Prior JSON")->required();
  smp->add_option("--count", o.sample.count, "Number of samples");
  smp->add_option("--sampler", o.sample.sampler, "direct, ddpm, exact or ddim");
  smp->add_option("--eta", o.sample.eta, "DDIM eta");
  smp->add_option("--out", o.sample.out, "Output samples CSV")->required();
  add_common(smp, o.sample.common);

  auto *deg = app->add_subcommand("degrade", "Apply a synthetic degradation to clean samples");
  deg->add_option("input", o.degrade.input, "Clean samples CSV")->required();
  deg->add_option("--op", o.degrade.op, "Degradation JSON");
  deg->add_option("--kind", o.degrade.kind, "identity, smear, blur, downsample_embed or additive_only");
  deg->add_option("--width", o.degrade.width, "Kernel width (smear: integer box, blur: Gaussian std)");
  deg->add_option("--stride", o.degrade.stride, "Downsampling stride");
  deg->add_option("--sigma", o.degrade.sigma, "Additive noise standard deviation");
  deg->add_option("--save-op", o.degrade.save_op, "Also write the operator as degradation JSON");
  deg->add_option("--out", o.degrade.out, "Output observations CSV")->required();
  add_common(deg, o.degrade.common, false);

  auto *alb = app->add_subcommand("album", "Generate a guided generative album from one observation");
  alb->add_option("prior", o.album.prior, "Prior JSON")->required();
  alb->add_option("observation", o.album.observation, "Observations CSV")->required();
  alb->add_option("--row", o.album.row, "Row of the observations file to use");
  alb->add_option("--sampler", o.album.sampler, "Reverse sampler: ddpm, exact or ddim");
  alb->add_option("--out", o.album.out, "Album CSV (sidecar JSON written beside it)")->required();
  add_guidance(alb, o.album.guidance);
  add_common(alb, o.album.common);

  auto *con = app->add_subcommand("constrain", "Re-estimate the prior on an anchor album");
  con->add_option("prior", o.constrain.prior, "Base prior JSON")->required();
  con->add_option("album", o.constrain.album, "Album CSV")->required();
  con->add_option("--components", o.constrain.components, "EM components (default min(4, album size))");
  con->add_option("--blend", o.constrain.blend, "Base-prior weight (default 0 generative, 0.2 personal)");
  con->add_option("--max-iters", o.constrain.max_iters, "EM iteration cap");
  con->add_option("--tol", o.constrain.tol, "EM convergence threshold");
  con->add_option("--floor", o.constrain.floor, "Covariance eigenvalue floor");
  con->add_option("--out", o.constrain.out, "Constrained prior JSON")->required();
  con->add_option("--report", o.constrain.report, "Constraining report JSON");
  add_common(con, o.constrain.common, false);

  auto *res = app->add_subcommand("restore", "Noise observations to step K and denoise with a prior");
  res->add_option("prior", o.restore.prior, "Prior JSON")->required();
  res->add_option("observations", o.restore.observations, "Observations CSV")->required();
  res->add_option("--K", o.restore.K, "Noise step");
  res->add_option("--sampler", o.restore.sampler, "Reverse sampler: ddpm, exact or ddim");
  res->add_option("--trajectory", o.restore.trajectory, "Write every intermediate state to this CSV");
  res->add_option("--out", o.restore.out, "Restored samples CSV")->required();
  add_common(res, o.restore.common);

  auto *e2e = app->add_subcommand("restore-e2e", "Album, constrain and restore for every observation");
  add_restore_e2e(e2e, o.e2e);
  e2e->add_option("--manifest", o.e2e_manifest, "Manifest path (default <outdir>/manifest.json)");

  auto *ak = app->add_subcommand("ablate-k", "Sweep the noise step K with and without constraining");
  add_sweep_common(ak, o.ablate_k.sweep);
  ak->add_option("--k-grid", o.ablate_k.k_grid, "start:stop:step or comma list");
  ak->add_option("--trials", o.ablate_k.trials, "Trials per grid point");
  ak->add_option("--constrained", o.ablate_k.constrained, "on, off or both");
  add_guidance(ak, o.ablate_k.guidance);

  auto *as = app->add_subcommand("ablate-skip", "Sweep the skip-guidance frequency of generative albums");
  add_sweep_common(as, o.ablate_skip.sweep);
  as->add_option("--skip-grid", o.ablate_skip.skip_grid, "start:stop:step or comma list");
  as->add_option("--trials", o.ablate_skip.trials, "Album repetitions");
  add_guidance(as, o.ablate_skip.guidance);

  auto *aa = app->add_subcommand("ablate-album-size", "Sweep the personal-album size");
  aa->add_option("prior", o.ablate_album_size.sweep.prior, "Base prior JSON")->required();
  aa->add_option("anchors", o.ablate_album_size.anchors, "Personal anchor pool CSV")->required();
  aa->add_option("truth", o.ablate_album_size.sweep.truth, "Clean ground-truth samples CSV")->required();
  aa->add_option("degradation", o.ablate_album_size.sweep.degradation, "Degradation JSON")->required();
  aa->add_option("--sizes", o.ablate_album_size.sizes, "Album sizes (comma list or start:stop:step)");
  aa->add_option("--trials", o.ablate_album_size.trials, "Degraded inputs");
  aa->add_option("--K", o.ablate_album_size.K, "Inference noise step");
  aa->add_option("--sampler", o.ablate_album_size.sweep.sampler, "Reverse sampler: ddpm, exact or ddim");
  aa->add_option("--feature-seed", o.ablate_album_size.sweep.feature_seed, "Seed of the identity feature map");
  aa->add_option("--out", o.ablate_album_size.sweep.out, "Sweep CSV")->required();
  add_common(aa, o.ablate_album_size.sweep.common);

  auto *th = app->add_subcommand("theory-check", "Check the forward-process KL and entropy formulas");
  th->add_option("--T", o.theory.T, "Diffusion steps of the linear schedule");
  th->add_option("--grid", o.theory.grid, "Number of t values");
  th->add_option("--dim", o.theory.dim, "Dimension");
  th->add_option("--mc-samples", o.theory.mc_samples, "Monte-Carlo sample count");
  th->add_option("--out", o.theory.out, "Report JSON")->required();
  add_common(th, o.theory.common);

  auto *ev = app->add_subcommand("eval", "Metric report for restored samples against ground truth");
  ev->add_option("restored", o.eval.restored, "Restored samples CSV")->required();
  ev->add_option("truth", o.eval.truth, "Ground-truth samples CSV (row-paired)")->required();
  ev->add_option("--prior", o.eval.prior, "Prior JSON for loglik_mean")->required();
  ev->add_option("--anchors", o.eval.anchors, "Score identity against this album instead of the truth rows");
  ev->add_option("--feature-seed", o.eval.feature_seed, "Seed of the identity feature map");
  ev->add_option("--out", o.eval.out, "Metric report JSON")->required();
  add_common(ev, o.eval.common, false);

  auto *rp = app->add_subcommand("replay", "Re-run a manifest and compare artifacts byte for byte");
  rp->add_option("manifest", o.replay.manifest, "Manifest JSON")->required();
  rp->add_option("--into", o.replay.into, "Directory for the replayed outputs (default <manifest dir>/replay)");
  return app;
}

int dispatch(CLI::App &app, Options &o, const Context &ctx) {
  auto used = [&](const char *name) { return app.got_subcommand(name); };
  if (used("fit-prior")) return cmd_fit_prior(o.fit_prior, ctx);
  if (used("synth-prior")) return cmd_synth_prior(o.synth_prior, ctx);
  if (used("sample")) return cmd_sample(o.sample, ctx);
  if (used("degrade")) return cmd_degrade(o.degrade, ctx);
  if (used("album")) return cmd_album(o.album, ctx);
  if (used("constrain")) return cmd_constrain(o.constrain, ctx);
  if (used("restore")) return cmd_restore(o.restore, ctx);
  if (used("restore-e2e")) return cmd_restore_e2e(o.e2e, o.e2e_manifest, ctx);
  if (used("ablate-k")) return cmd_ablate_k(o.ablate_k, ctx);
  if (used("ablate-skip")) return cmd_ablate_skip(o.ablate_skip, ctx);
  if (used("ablate-album-size")) return cmd_ablate_album_size(o.ablate_album_size, ctx);
  if (used("theory-check")) return cmd_theory_check(o.theory, ctx);
  if (used("eval")) return cmd_eval(o.eval, ctx);
  if (used("replay")) return cmd_replay(o.replay, ctx);
  throw ValidationError("no subcommand given");
}

void parse(CLI::App &app, const std::vector<std::string> &args) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  app.parse(reversed);
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  Options options;
  auto app = build_app(options);
  const Context ctx{args, out, err};
  try {
    parse(*app, args);
  } catch (const CLI::CallForHelp &) {
    out << app->help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp &) {
    out << app->help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  try {
    return dispatch(*app, options, ctx);
  } catch (const StageError &e) {
    err << "error: stage '" << e.stage() << "' failed: " << e.what() << "\n";
    return kStage;
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError &e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception &e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  }
}

RestoreE2EOptions parse_restore_e2e(const std::vector<std::string> &args) {
  CLI::App app("restore-e2e");
  RestoreE2EOptions o;
  add_restore_e2e(&app, o);
  parse(app, args);
  return o;
}

} // namespace genrestore::cli
