#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace genrestore;

namespace {

/// KL(N(m1,S1) || N(m2,S2)) with explicit inverse and determinants.
double kl_explicit(const Vector &m1, const Matrix &S1, const Vector &m2, const Matrix &S2) {
  const Matrix inv2 = S2.fullPivLu().inverse();
  const Vector dm = m2 - m1;
  const auto d = static_cast<double>(m1.size());
  return 0.5 * ((inv2 * S1).trace() + dm.dot(inv2 * dm) - d + std::log(S2.determinant() / S1.determinant()));
}

} // namespace

TEST(KlNoisy, IdenticalInputsGiveZero) {
  const Vector x{{0.3, -1.0, 2.0}};
  for (int t : {1, 500, 1000}) EXPECT_EQ(kl_noisy(x, x, default_schedule(), t), 0.0);
}

TEST(KlNoisy, HalfAlphaBarUnitDistance) {
  const NoiseSchedule s = NoiseSchedule::linear(1, 0.5, 0.5);
  ASSERT_EQ(s.alpha_bar(1), 0.5);
  EXPECT_DOUBLE_EQ(kl_noisy(Vector{{1.0, 0.0}}, Vector{{0.0, 0.0}}, s, 1), 0.5);
}

TEST(KlNoisy, MatchesGeneralGaussianKl) {
  const NoiseSchedule s = default_schedule();
  RandomStream rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 1 + static_cast<Index>(trial % 4);
    const Vector x0 = 2.0 * rng.normal_vector(d), y0 = 2.0 * rng.normal_vector(d);
    const int t = 1 + static_cast<int>(rng.next_u64() % 1000);
    const double ab = s.alpha_bar(t);
    const Matrix S = (1.0 - ab) * Matrix::Identity(d, d);
    const double expected = kl_explicit(std::sqrt(ab) * x0, S, std::sqrt(ab) * y0, S);
    EXPECT_NEAR(kl_noisy(x0, y0, s, t), expected, 1e-12 * std::max(1.0, std::abs(expected))) << "t=" << t;
    EXPECT_NEAR(gaussian_kl(std::sqrt(ab) * x0, S, std::sqrt(ab) * y0, S), expected,
                1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(KlNoisy, MatchesMonteCarloWithinThreeStandardErrors) {
  const NoiseSchedule s = default_schedule();
  const Vector x0{{-1.2, 0.4}}, y0{{0.9, 0.1}};
  RandomStream rng(2);
  const Index n = 1'000'000;
  for (int t : {30, 200, 600}) {
    const double ab = s.alpha_bar(t), var = 1.0 - ab;
    const Vector mx = std::sqrt(ab) * x0, my = std::sqrt(ab) * y0;
    double sum = 0.0, sum2 = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Vector x = mx + std::sqrt(var) * rng.normal_vector(2);
      const double r = ((x - my).squaredNorm() - (x - mx).squaredNorm()) / (2.0 * var);
      sum += r;
      sum2 += r * r;
    }
    const double mean = sum / static_cast<double>(n);
    const double se = std::sqrt((sum2 / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
    EXPECT_NEAR(kl_noisy(x0, y0, s, t), mean, 3.0 * se) << "t=" << t;
  }
}

TEST(KlNoisy, StrictlyDecreasingOverSchedule) {
  const NoiseSchedule s = default_schedule();
  const Vector x0{{0.5, 0.5}}, y0{{-0.25, 1.0}};
  for (int t = 2; t <= s.steps(); ++t) ASSERT_LT(kl_noisy(x0, y0, s, t), kl_noisy(x0, y0, s, t - 1)) << t;
}

TEST(KlNoisy, RejectsStepOutOfRange) {
  EXPECT_THROW(kl_noisy(Vector::Zero(2), Vector::Zero(2), default_schedule(), 0), ValidationError);
  EXPECT_THROW(kl_noisy(Vector::Zero(2), Vector::Zero(2), default_schedule(), 1001), ValidationError);
  EXPECT_THROW(kl_noisy(Vector::Zero(2), Vector::Zero(3), default_schedule(), 1), ValidationError);
}

TEST(EntropyForward, LogTermVanishes) {
  const double b = 1.0 / (2.0 * std::numbers::pi);
  const NoiseSchedule s = NoiseSchedule::linear(1, b, b);
  EXPECT_NEAR(entropy_forward(s, 1, 1), 0.5, 1e-15);
  EXPECT_NEAR(entropy_forward(s, 1, 3), 1.5, 1e-14);
}

TEST(EntropyForward, StrictlyIncreasing) {
  const NoiseSchedule s = default_schedule();
  for (int t = 2; t <= s.steps(); ++t) ASSERT_GT(entropy_forward(s, t, 2), entropy_forward(s, t - 1, 2)) << t;
}

TEST(EntropyForward, MatchesGaussianPlugInEstimate) {
  const NoiseSchedule s = default_schedule();
  RandomStream rng(3);
  const Index n = 1'000'000;
  for (int k = 0; k < 5; ++k) {
    const int t = 1 + static_cast<int>(rng.next_u64() % 1000);
    const double sd = std::sqrt(1.0 - s.alpha_bar(t));
    double sum = 0.0, sum2 = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double x = 0.7 * std::sqrt(s.alpha_bar(t)) + sd * rng.normal();
      sum += x;
      sum2 += x * x;
    }
    const double m = sum / static_cast<double>(n);
    const double var = (sum2 - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    const double h_mc = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * var);
    EXPECT_NEAR(entropy_forward(s, t, 1), h_mc, 0.02 * std::abs(h_mc)) << "t=" << t;
  }
}

TEST(TheoryCheck, ReferenceMixturePassesOnCoarseGrid) {
  TheoryConfig cfg;
  cfg.grid = 5;
  cfg.kl_samples = cfg.entropy_samples = 200'000;
  const TheoryReport r = theory_check(default_schedule(), reference::mixture_2d(), cfg);
  EXPECT_EQ(r.grid, (std::vector<int>{1, 251, 501, 750, 1000}));
  EXPECT_EQ(r.checks.size(), 5u * 3u + 2u);
  for (const auto &c : r.checks) EXPECT_TRUE(c.pass) << c.name << " t=" << c.t;
  EXPECT_TRUE(r.all_pass());
}

TEST(TheoryCheck, SinglePointGrid) {
  EXPECT_EQ(theory_grid(1000, 1), std::vector<int>{500});
  EXPECT_EQ(theory_grid(1000, 2), (std::vector<int>{1, 1000}));
}

TEST(FrechetDistance, IdenticalSetsGiveZero) {
  RandomStream rng(4);
  const Matrix a = sample(reference::mixture_2d(), 300, rng);
  EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-9);
}

TEST(FrechetDistance, OneDimensionalClosedForm) {
  RandomStream rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix a(50 + trial, 1), b(80, 1);
    for (Index i = 0; i < a.rows(); ++i) a(i, 0) = 1.0 + 2.0 * rng.normal();
    for (Index i = 0; i < b.rows(); ++i) b(i, 0) = -0.5 + 0.7 * rng.normal();
    EXPECT_NEAR(frechet_distance(a, b), oracle::frechet_1d(a, b, 1e-10), 1e-10);
    EXPECT_NEAR(frechet_distance(a, b), oracle::frechet_1d(a, b), 1e-9);
  }
}

TEST(FrechetDistance, RepeatedPointSetsAtUnitGap) {
  const Matrix a = Matrix::Zero(5, 3);
  Matrix b = Matrix::Zero(7, 3);
  b.col(0).setOnes();
  EXPECT_NEAR(frechet_distance(a, b), 1.0, 1e-9);
}

TEST(FrechetDistance, SymmetricAndNonNegative) {
  RandomStream rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = sample(oracle::random_prior(3, 2, rng), 40, rng);
    const Matrix b = sample(oracle::random_prior(3, 2, rng), 60, rng);
    const double ab = frechet_distance(a, b), ba = frechet_distance(b, a);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, ba, 1e-9 * std::max(1.0, ab));
  }
}

TEST(FrechetDistance, RejectsBadInput) {
  EXPECT_THROW(frechet_distance(Matrix::Zero(1, 2), Matrix::Zero(5, 2)), ValidationError);
  EXPECT_THROW(frechet_distance(Matrix::Zero(3, 2), Matrix::Zero(5, 3)), ValidationError);
  Matrix bad = Matrix::Zero(3, 2);
  bad(0, 0) = INFINITY;
  EXPECT_THROW(frechet_distance(bad, Matrix::Zero(5, 2)), ValidationError);
}

TEST(IdentityScore, SelfAndAntipodal) {
  RandomStream rng(7);
  const Matrix anchors = sample(reference::subjects_mixture(), 5, rng);
  const Vector a = anchors.row(3).transpose();
  EXPECT_NEAR(identity_score(a, anchors, 42), 1.0, 1e-12);
  EXPECT_NEAR(identity_score(-a, Matrix(anchors.row(3)), 42), -1.0, 1e-12);
}

TEST(IdentityScore, ScaleInvariantBoundedDeterministic) {
  RandomStream rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 1 + static_cast<Index>(trial % 20);
    const Matrix anchors = Matrix::Random(1 + trial % 4, d);
    const Vector x = rng.normal_vector(d);
    const double s = identity_score(x, anchors, 9);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(identity_score(3.5 * x, anchors, 9), s, 1e-12);
    EXPECT_EQ(identity_score(x, anchors, 9), s);
  }
  EXPECT_EQ(FeatureMap(40, 1).weights().rows(), 16);
  EXPECT_EQ(FeatureMap(3, 1).weights().rows(), 3);
}

TEST(IdentityScore, ZeroFeatureGivesZeroCosine) {
  EXPECT_EQ(identity_score(Vector::Zero(3), Matrix::Ones(1, 3), 1), 0.0);
  EXPECT_THROW(identity_score(Vector::Zero(3), Matrix(0, 3), 1), ValidationError);
}

TEST(Degradation, IdentityNoiselessIsExact) {
  RandomStream rng(9);
  const DegradationOp op = make_degradation(DegradationKind::identity, {3, 1.0, 1, 0.0});
  const Vector x{{1.0, -2.0, 0.5}};
  EXPECT_EQ(degrade(x, op, rng), x);
  EXPECT_EQ(op.matrix, Matrix::Identity(3, 3));
}

TEST(Degradation, SmearPreservesConstantsAndWidthOneIsIdentity) {
  RandomStream rng(10);
  for (double w : {1.0, 2.0, 3.0, 5.0}) {
    const DegradationOp op = make_degradation(DegradationKind::smear, {7, w, 1, 0.0});
    const Vector c = Vector::Constant(7, 2.5);
    EXPECT_LT((degrade(c, op, rng) - c).cwiseAbs().maxCoeff(), 1e-14);
    if (w == 1.0) {
      EXPECT_EQ(op.matrix, Matrix::Identity(7, 7));
    }
  }
}

TEST(Degradation, BlurRowsSumToOne) {
  for (double w : {0.3, 0.6, 1.0, 2.5}) {
    for (Index d : {1, 2, 4, 9}) {
      const DegradationOp op = make_degradation(DegradationKind::blur, {d, w, 1, 0.1});
      for (Index i = 0; i < d; ++i) {
        double s = 0.0;
        for (Index j = 0; j < d; ++j) s += op.matrix(i, j);
        EXPECT_NEAR(s, 1.0, 1e-12);
        // Kernel shape: exp(-(i-j)^2 / 2w^2) up to row normalization.
        for (Index j = 0; j + 1 < d; ++j) {
          const double di = static_cast<double>(i - j), dj = static_cast<double>(i - j - 1);
          EXPECT_NEAR(op.matrix(i, j) / op.matrix(i, j + 1), std::exp(-(di * di - dj * dj) / (2.0 * w * w)),
                      1e-9 * std::exp(-(di * di - dj * dj) / (2.0 * w * w)));
        }
      }
    }
  }
}

TEST(Degradation, DownsampleStrideTwoOnFour) {
  RandomStream rng(11);
  const DegradationOp op = make_degradation(DegradationKind::downsample_embed, {4, 1.0, 2, 0.0});
  const Vector x{{1.0, 3.0, -2.0, 6.0}};
  EXPECT_EQ(degrade(x, op, rng), (Vector{{2.0, 2.0, 2.0, 2.0}}));
  const Vector y{{4.0, 0.0, 1.0, 2.0}};
  EXPECT_EQ(degrade(y, op, rng), (Vector{{2.0, 2.0, 1.5, 1.5}}));
}

TEST(Degradation, AdditiveNoiseMoments) {
  RandomStream rng(12);
  const DegradationOp op = make_degradation(DegradationKind::additive_only, {2, 1.0, 1, 0.5});
  const Index n = 50000;
  Matrix out(n, 2);
  const Vector x{{1.0, -1.0}};
  for (Index i = 0; i < n; ++i) out.row(i) = degrade(x, op, rng).transpose();
  const auto m = oracle::moments(out);
  EXPECT_TRUE(oracle::mean_within_3sigma(m, x, 0.25 * Matrix::Identity(2, 2), n));
  EXPECT_TRUE(oracle::cov_within_3sigma(m, 0.25 * Matrix::Identity(2, 2), n));
}

TEST(Degradation, RejectsBadParams) {
  RandomStream rng(13);
  EXPECT_THROW(make_degradation(DegradationKind::blur, {4, 0.0, 1, 0.0}), ValidationError);
  EXPECT_THROW(make_degradation(DegradationKind::smear, {4, 1.5, 1, 0.0}), ValidationError);
  EXPECT_THROW(make_degradation(DegradationKind::downsample_embed, {4, 1.0, 0, 0.0}), ValidationError);
  EXPECT_THROW(make_degradation(DegradationKind::identity, {4, 1.0, 1, -1.0}), ValidationError);
  EXPECT_THROW(make_degradation(DegradationKind::identity, {0, 1.0, 1, 0.0}), ValidationError);
  EXPECT_THROW(degrade(Vector::Zero(3), make_degradation(DegradationKind::identity, {4, 1.0, 1, 0.0}), rng),
               ValidationError);
  EXPECT_THROW(parse_degradation_kind("jpeg"), ValidationError);
}

TEST(Evaluate, PerfectRestorationMetrics) {
  RandomStream rng(14);
  const Matrix truth = sample(reference::mixture_2d(), 50, rng);
  const MetricReport r = evaluate(truth, truth, reference::mixture_2d(), 3);
  EXPECT_NEAR(r.frechet, 0.0, 1e-9);
  EXPECT_EQ(r.fidelity_l2, 0.0);
  EXPECT_NEAR(r.identity, 1.0, 1e-12);
  double ll = 0.0;
  for (Index i = 0; i < truth.rows(); ++i) ll += oracle::mixture_log_density(reference::mixture_2d(), truth.row(i).transpose());
  EXPECT_NEAR(r.loglik_mean, ll / 50.0, 1e-10);
}
