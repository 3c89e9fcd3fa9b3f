#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace genrestore;

namespace {

/// Two-sample 3-sigma agreement of per-coordinate means and variances.
::testing::AssertionResult same_moments(const Matrix &a, const Matrix &b) {
  const auto ma = oracle::moments(a), mb = oracle::moments(b);
  const auto na = static_cast<double>(a.rows()), nb = static_cast<double>(b.rows());
  for (Index i = 0; i < a.cols(); ++i) {
    const double va = ma.cov(i, i), vb = mb.cov(i, i);
    const double mean_sd = std::sqrt(va / na + vb / nb);
    if (std::abs(ma.mean[i] - mb.mean[i]) > 3.0 * mean_sd) {
      return ::testing::AssertionFailure() << "mean " << i << ": " << ma.mean[i] << " vs " << mb.mean[i];
    }
    const double var_sd = std::sqrt(2.0 * va * va / (na - 1.0) + 2.0 * vb * vb / (nb - 1.0));
    if (std::abs(va - vb) > 3.0 * var_sd) {
      return ::testing::AssertionFailure() << "variance " << i << ": " << va << " vs " << vb;
    }
  }
  return ::testing::AssertionSuccess();
}

MixturePrior isotropic(const Vector &mu, double var) {
  return MixturePrior({{1.0, mu, var * Matrix::Identity(mu.size(), mu.size())}});
}

Matrix one_step_draws(const DiffusionModel &model, const SampleState &state, SamplerKind kind, Index n,
                      std::uint64_t seed, double eta = 0.0) {
  RandomStream rng(seed);
  Matrix out(n, model.dim());
  for (Index i = 0; i < n; ++i) out.row(i) = reverse_step(model, state, kind, rng, eta).x.transpose();
  return out;
}

Matrix full_chains(const DiffusionModel &model, SamplerKind kind, Index n, std::uint64_t seed) {
  Matrix out(n, model.dim());
  const int T = model.schedule().steps();
  for (Index i = 0; i < n; ++i) {
    RandomStream rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    out.row(i) = denoise_from(model, rng.normal_vector(model.dim()), T, kind, rng).transpose();
  }
  return out;
}

} // namespace

TEST(Schedule, DefaultTerminalAlphaBar) {
  const NoiseSchedule s = default_schedule();
  const long double ref = oracle::alpha_bar_product(1000, 1e-4, 0.02, 1000);
  EXPECT_NEAR(s.alpha_bar(1000), static_cast<double>(ref), 1e-13 * static_cast<double>(ref));
  // Frozen value of the cumulative product.
  EXPECT_NEAR(s.alpha_bar(1000), 4.0358297653756e-5, 1e-16);
  EXPECT_NEAR(s.alpha_bar(1000), 4.04e-5, 5e-8);
}

TEST(Schedule, SingleStep) {
  const NoiseSchedule s = make_schedule(ScheduleKind::linear, 1, 0.3, 0.5);
  EXPECT_EQ(s.steps(), 1);
  EXPECT_EQ(s.alpha_bar(1), 1.0 - 0.3);
}

TEST(Schedule, InvariantsHold) {
  for (const auto &[T, b0, b1] : std::vector<std::tuple<int, double, double>>{
           {1000, 1e-4, 0.02}, {10, 0.1, 0.9}, {2000, 1e-5, 1e-2}, {50, 0.01, 0.01}}) {
    const NoiseSchedule s = NoiseSchedule::linear(T, b0, b1);
    EXPECT_DOUBLE_EQ(s.beta(1), b0);
    EXPECT_NEAR(s.beta(T), b1, 1e-15);
    for (int t = 1; t <= T; ++t) {
      const double ab = s.alpha_bar(t);
      EXPECT_GT(ab, 0.0);
      EXPECT_LT(ab, 1.0);
      EXPECT_EQ(s.alpha(t), 1.0 - s.beta(t));
      if (t > 1) {
        EXPECT_LT(ab, s.alpha_bar(t - 1));
        EXPECT_LE(std::abs(ab - s.alpha(t) * s.alpha_bar(t - 1)), 1e-15 * ab);
      }
    }
  }
}

TEST(Schedule, RejectsBadParameters) {
  EXPECT_THROW(NoiseSchedule::linear(0, 1e-4, 0.02), ValidationError);
  EXPECT_THROW(NoiseSchedule::linear(10, 0.0, 0.02), ValidationError);
  EXPECT_THROW(NoiseSchedule::linear(10, 0.03, 0.02), ValidationError);
  EXPECT_THROW(NoiseSchedule::linear(10, 1e-4, 1.0), ValidationError);
  EXPECT_THROW((void)default_schedule().alpha_bar(1001), ValidationError);
}

TEST(ForwardNoise, StepZeroIsIdentity) {
  RandomStream rng(1);
  const Vector x0{{1.0, 2.0}};
  EXPECT_EQ(forward_noise(x0, 0, default_schedule(), rng), x0);
}

TEST(ForwardNoise, MonteCarloMoments) {
  const NoiseSchedule s = default_schedule();
  const Vector x0{{1.5, -0.5}};
  const int t = 300;
  const Index n = 100000;
  RandomStream rng(2);
  Matrix draws(n, 2);
  for (Index i = 0; i < n; ++i) draws.row(i) = forward_noise(x0, t, s, rng).transpose();
  const double ab = s.alpha_bar(t);
  const Matrix cov = (1.0 - ab) * Matrix::Identity(2, 2);
  const auto m = oracle::moments(draws);
  EXPECT_TRUE(oracle::mean_within_3sigma(m, std::sqrt(ab) * x0, cov, n));
  EXPECT_TRUE(oracle::cov_within_3sigma(m, cov, n));
}

TEST(ForwardNoise, DeterministicAndRangeChecked) {
  RandomStream a(3), b(3);
  const Vector x0 = Vector::Ones(4);
  EXPECT_EQ(forward_noise(x0, 500, default_schedule(), a), forward_noise(x0, 500, default_schedule(), b));
  EXPECT_THROW(forward_noise(x0, 1001, default_schedule(), a), ValidationError);
  EXPECT_THROW(forward_noise(x0, -1, default_schedule(), a), ValidationError);
}

TEST(ForwardNoise, PriorSamplesFollowDiffusedMarginal) {
  const MixturePrior p = reference::mixture_2d();
  const NoiseSchedule s = default_schedule();
  const int t = 150;
  const Index n = 100000;
  RandomStream rng(4);
  const Matrix x0 = sample(p, n, rng);
  Matrix xt(n, 2);
  for (Index i = 0; i < n; ++i) xt.row(i) = forward_noise(x0.row(i).transpose(), t, s, rng).transpose();
  // Mixture moments of diffuse(p, ab).
  const MixturePrior q = diffuse(p, s.alpha_bar(t));
  Vector mean = Vector::Zero(2);
  Matrix second = Matrix::Zero(2, 2);
  for (const auto &c : q.components()) {
    mean += c.weight * c.mean;
    second += c.weight * (c.cov + c.mean * c.mean.transpose());
  }
  const Matrix cov = second - mean * mean.transpose();
  const auto m = oracle::moments(xt);
  EXPECT_TRUE(oracle::mean_within_3sigma(m, mean, cov, n));
  // Non-Gaussian marginal: compare covariance entries with a bootstrap-free
  // bound from the fourth moments of the draws.
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 0; j < 2; ++j) {
      const Eigen::ArrayXd prod = (xt.col(i).array() - m.mean[i]) * (xt.col(j).array() - m.mean[j]);
      const double sd = std::sqrt((prod - prod.mean()).square().mean() / static_cast<double>(n));
      EXPECT_LT(std::abs(m.cov(i, j) - cov(i, j)), 3.0 * sd) << i << "," << j;
    }
  }
}

TEST(DiffusionModel, MarginalsMatchDiffuse) {
  RandomStream rng(5);
  const MixturePrior p = oracle::random_prior(3, 3, rng);
  const DiffusionModel model(p, default_schedule());
  for (int t : {1, 2, 17, 200, 600, 999, 1000}) {
    const MixturePrior ref = diffuse(p, model.schedule().alpha_bar(t));
    const MixturePrior &m = model.marginal(t);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_LE(std::abs(m.component(i).weight - ref.component(i).weight), 1e-12);
      EXPECT_LE((m.component(i).mean - ref.component(i).mean).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((m.component(i).cov - ref.component(i).cov).cwiseAbs().maxCoeff(), 1e-12);
    }
    const Vector x = rng.normal_vector(3);
    EXPECT_EQ(score(m, x), score(ref, x));
  }
  EXPECT_EQ(&model.marginal(0), &model.prior());
}

TEST(Tweedie, ConjugateClosedForm) {
  const Vector mu{{0.5, -1.0, 2.0}};
  const double var = 0.7;
  const DiffusionModel model(isotropic(mu, var), default_schedule());
  RandomStream rng(6);
  for (int t : {1, 10, 100, 500, 1000}) {
    const double ab = model.schedule().alpha_bar(t);
    for (int k = 0; k < 20; ++k) {
      const Vector xt = 2.0 * rng.normal_vector(3);
      const Vector expected = oracle::isotropic_posterior_mean(xt, mu, var, ab);
      EXPECT_LT((tweedie_denoise(model, {xt, t}) - expected).cwiseAbs().maxCoeff(), 1e-10) << "t=" << t;
    }
  }
}

TEST(Tweedie, NoiselessLimitReturnsInput) {
  const DiffusionModel model(reference::mixture_2d(), NoiseSchedule::linear(1, 1e-12, 1e-12));
  const Vector xt{{0.3, -0.8}};
  EXPECT_LT((tweedie_denoise(model, {xt, 1}) - xt).norm(), 1e-9);
}

TEST(Tweedie, DualPathsAgreeAtThousandStates) {
  RandomStream rng(7);
  const NoiseSchedule s = default_schedule();
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index d = 1 + static_cast<Index>(trial % 4);
    const DiffusionModel model(oracle::random_prior(d, 1 + trial % 4, rng), s);
    const int t = 1 + static_cast<int>(rng.next_u64() % 1000);
    const Vector xt = 2.0 * rng.normal_vector(d);
    const Vector a = denoised_mean(model, {xt, t}, DenoisePath::tweedie_score);
    const Vector b = denoised_mean(model, {xt, t}, DenoisePath::posterior_mean);
    worst = std::max(worst, (a - b).norm() / std::max(1.0, a.norm()));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Tweedie, RejectsStepZero) {
  const DiffusionModel model(reference::mixture_2d(), default_schedule());
  EXPECT_THROW(tweedie_denoise(model, {Vector::Zero(2), 0}), ValidationError);
}

TEST(Ddpm, StationaryStandardNormal) {
  const DiffusionModel model(isotropic(Vector::Zero(2), 1.0), default_schedule());
  const Index n = 20000;
  const Matrix out = full_chains(model, SamplerKind::ddpm, n, 8);
  const auto m = oracle::moments(out);
  EXPECT_TRUE(oracle::mean_within_3sigma(m, Vector::Zero(2), Matrix::Identity(2, 2), n));
  EXPECT_TRUE(oracle::cov_within_3sigma(m, Matrix::Identity(2, 2), n));
}

TEST(Ddpm, TerminalStepIsDeterministic) {
  const DiffusionModel model(reference::mixture_2d(), default_schedule());
  RandomStream a(9), b(10);
  const SampleState s{Vector{{0.2, 0.4}}, 1};
  const SampleState out_a = ddpm_step(model, s, a), out_b = ddpm_step(model, s, b);
  EXPECT_EQ(out_a.x, out_b.x);
  EXPECT_EQ(out_a.t, 0);
}

TEST(ReverseSteps, RejectStepZero) {
  const DiffusionModel model(reference::mixture_2d(), default_schedule());
  RandomStream rng(11);
  const SampleState s{Vector::Zero(2), 0};
  EXPECT_THROW(ddpm_step(model, s, rng), ValidationError);
  EXPECT_THROW(exact_reverse_step(model, s, rng), ValidationError);
  EXPECT_THROW(ddim_step(model, s, 0.0, rng), ValidationError);
  EXPECT_THROW(ddim_step(model, {Vector::Zero(2), 5}, 1.5, rng), ValidationError);
}

TEST(ReverseSteps, OneStepMomentsOnSingleGaussian) {
  // Prior N(mu, v I). Exact: x_{t-1} | x_t from the joint Gaussian of
  // (x_{t-1}, x_t). DDPM: mean from x0_hat, variance beta_tilde.
  const Vector mu{{1.0, -1.0}};
  const double v = 0.4;
  const DiffusionModel model(isotropic(mu, v), default_schedule());
  const auto &sch = model.schedule();
  const Index n = 20000;
  for (int t : {2, 50, 400, 900}) {
    const Vector xt{{0.6, -0.2}};
    const double a = sch.alpha_bar(t - 1), al = sch.alpha(t), b = sch.beta(t), ab = sch.alpha_bar(t);
    const Vector m1 = std::sqrt(a) * mu;
    const double s1 = a * v + 1.0 - a;
    const Vector exact_mean = m1 + s1 * std::sqrt(al) / (al * s1 + b) * (xt - std::sqrt(al) * m1);
    const Matrix exact_cov = s1 * b / (al * s1 + b) * Matrix::Identity(2, 2);
    const auto me = oracle::moments(one_step_draws(model, {xt, t}, SamplerKind::exact, n, 12));
    EXPECT_TRUE(oracle::mean_within_3sigma(me, exact_mean, exact_cov, n)) << "exact t=" << t;
    EXPECT_TRUE(oracle::cov_within_3sigma(me, exact_cov, n)) << "exact t=" << t;

    const Vector x0_hat = oracle::isotropic_posterior_mean(xt, mu, v, ab);
    const Vector ddpm_mean = std::sqrt(a) * b / (1.0 - ab) * x0_hat + std::sqrt(al) * (1.0 - a) / (1.0 - ab) * xt;
    const Matrix ddpm_cov = b * (1.0 - a) / (1.0 - ab) * Matrix::Identity(2, 2);
    const auto md = oracle::moments(one_step_draws(model, {xt, t}, SamplerKind::ddpm, n, 13));
    EXPECT_TRUE(oracle::mean_within_3sigma(md, ddpm_mean, ddpm_cov, n)) << "ddpm t=" << t;
    EXPECT_TRUE(oracle::cov_within_3sigma(md, ddpm_cov, n)) << "ddpm t=" << t;
  }
}

TEST(ExactStep, FullChainOccupancy) {
  const MixturePrior p({{0.7, Vector{{-3.0, 0.0}}, 0.3 * Matrix::Identity(2, 2)},
                        {0.3, Vector{{3.0, 0.0}}, 0.3 * Matrix::Identity(2, 2)}});
  const DiffusionModel model(p, default_schedule());
  const Index n = 4000;
  const Matrix out = full_chains(model, SamplerKind::exact, n, 14);
  const double frac = static_cast<double>((out.col(0).array() < 0.0).count()) / static_cast<double>(n);
  EXPECT_NEAR(frac, 0.7, 3.0 * std::sqrt(0.7 * 0.3 / static_cast<double>(n)));
}

TEST(ExactStep, Deterministic) {
  const DiffusionModel model(reference::mixture_2d(), default_schedule());
  RandomStream a(15), b(15);
  const SampleState s{Vector{{0.1, 0.2}}, 321};
  EXPECT_EQ(exact_reverse_step(model, s, a).x, exact_reverse_step(model, s, b).x);
}

TEST(Ddim, EtaZeroIsDeterministic) {
  const DiffusionModel model(reference::mixture_2d(), default_schedule());
  RandomStream a(16), b(17);
  const SampleState s{Vector{{0.1, 0.2}}, 500};
  EXPECT_EQ(ddim_step(model, s, 0.0, a).x, ddim_step(model, s, 0.0, b).x);
}

TEST(Ddim, EtaOneMatchesDdpmOnSingleGaussian) {
  const DiffusionModel model(isotropic(Vector{{1.0, -1.0}}, 0.4), default_schedule());
  for (int t : {2, 50, 400, 900}) {
    const SampleState s{Vector{{0.6, -0.2}}, t};
    EXPECT_TRUE(same_moments(one_step_draws(model, s, SamplerKind::ddim, 20000, 18, 1.0),
                             one_step_draws(model, s, SamplerKind::ddpm, 20000, 19)))
        << "t=" << t;
  }
}

TEST(Ddim, ReconstructionErrorShrinksAlongChain) {
  const DiffusionModel model(isotropic(Vector{{1.0, -1.0}}, 0.3), default_schedule());
  RandomStream rng(20);
  std::vector<Vector> predictions;
  SampleState state{rng.normal_vector(2), 1000};
  while (state.t > 0) {
    predictions.push_back(tweedie_denoise(model, state));
    state = ddim_step(model, state, 0.0, rng);
  }
  double prev = INFINITY;
  for (const auto &p : predictions) {
    const double err = (p - state.x).norm();
    EXPECT_LE(err, prev);
    prev = err;
  }
  EXPECT_GT((predictions.front() - state.x).norm(), 0.0);
  EXPECT_EQ(prev, 0.0);
}

TEST(DenoiseFrom, ZeroStepsIsIdentity) {
  const DiffusionModel model(reference::mixture_2d(), default_schedule());
  RandomStream rng(21);
  const Vector x{{3.0, -4.0}};
  EXPECT_EQ(denoise_from(model, x, 0, SamplerKind::ddpm, rng), x);
  EXPECT_THROW(denoise_from(model, x, 1001, SamplerKind::ddpm, rng), ValidationError);
  EXPECT_THROW(denoise_from(model, x, -1, SamplerKind::ddpm, rng), ValidationError);
}

TEST(DenoiseFrom, FullChainsReproducePriorMoments) {
  const MixturePrior p = reference::mixture_2d();
  const DiffusionModel model(p, default_schedule());
  const Index n = 5000;
  RandomStream rng(22);
  const Matrix direct = sample(p, 200000, rng);
  EXPECT_TRUE(same_moments(full_chains(model, SamplerKind::exact, n, 23), direct));
  EXPECT_TRUE(same_moments(full_chains(model, SamplerKind::ddpm, n, 24), direct));
}

TEST(DenoiseFrom, BitIdenticalUnderSeed) {
  const DiffusionModel model(reference::mixture_2d(), default_schedule());
  for (auto kind : {SamplerKind::ddpm, SamplerKind::exact, SamplerKind::ddim}) {
    RandomStream a(25), b(25);
    EXPECT_EQ(denoise_from(model, Vector{{0.5, 0.5}}, 300, kind, a),
              denoise_from(model, Vector{{0.5, 0.5}}, 300, kind, b));
  }
}

TEST(Sampler, ParsesNames) {
  EXPECT_EQ(parse_sampler("ddpm"), SamplerKind::ddpm);
  EXPECT_EQ(parse_sampler("exact"), SamplerKind::exact);
  EXPECT_EQ(parse_sampler("ddim"), SamplerKind::ddim);
  EXPECT_THROW(parse_sampler("euler"), ValidationError);
  EXPECT_STREQ(to_string(SamplerKind::exact), "exact");
}
