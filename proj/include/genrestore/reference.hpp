#pragma once

// Fixed synthetic priors and degradations shared by the CLI (synth-prior),
// the test suites and the acceptance harness.

#include "genrestore/analysis.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace genrestore::reference {

/// Two anisotropic components in 2D, weights 0.6 / 0.4.
inline MixturePrior mixture_2d() {
  Matrix a(2, 2), b(2, 2);
  a << 0.45, 0.10, 0.10, 0.35;
  b << 0.40, -0.05, -0.05, 0.45;
  return MixturePrior({{0.6, Vector{{-1.5, -0.5}}, a}, {0.4, Vector{{1.5, 0.5}}, b}});
}

/// Three well-separated 2D components for fit-and-recover checks.
inline MixturePrior mixture_3c_2d() {
  Matrix a(2, 2), b(2, 2), c(2, 2);
  a << 0.30, 0.05, 0.05, 0.20;
  b << 0.25, -0.08, -0.08, 0.35;
  c << 0.20, 0.00, 0.00, 0.20;
  return MixturePrior({{0.5, Vector{{-3.0, 0.0}}, a}, {0.3, Vector{{3.0, 1.0}}, b}, {0.2, Vector{{0.0, 4.0}}, c}});
}

inline constexpr int kSubjectCount = 6;
inline constexpr Index kSubjectDim = 4;

/// Six equally weighted "subjects" in 4D arranged around the origin, so the
/// direction of a sample (what the identity feature map sees) tells subjects
/// apart.
inline MixturePrior subjects_mixture() {
  std::vector<GaussianComponent> comps;
  for (int j = 0; j < kSubjectCount; ++j) {
    const double th = 2.0 * std::numbers::pi * j / kSubjectCount;
    Vector mu{{2.0 * std::cos(th), 2.0 * std::sin(th), 1.6 * std::cos(2.0 * th + 0.5),
               1.6 * std::sin(2.0 * th + 0.5)}};
    Matrix cov = 0.25 * Matrix::Identity(kSubjectDim, kSubjectDim);
    comps.push_back({1.0 / kSubjectCount, std::move(mu), std::move(cov)});
  }
  return MixturePrior(std::move(comps));
}

/// The single component of subject j as a standalone prior (truth generator).
inline MixturePrior subject(int j) {
  GaussianComponent c = subjects_mixture().component(static_cast<std::size_t>(j));
  c.weight = 1.0;
  return MixturePrior({c});
}

inline DegradationOp degradation_2d() {
  DegradationParams p;
  p.dim = 2;
  p.width = 0.6;
  p.sigma = 0.3;
  return make_degradation(DegradationKind::blur, p);
}

inline DegradationOp degradation_subjects() {
  DegradationParams p;
  p.dim = kSubjectDim;
  p.width = 1.0;
  p.sigma = 0.3;
  return make_degradation(DegradationKind::blur, p);
}

inline MixturePrior by_name(const std::string &name) {
  if (name == "mixture-2d") return mixture_2d();
  if (name == "mixture-3c-2d") return mixture_3c_2d();
  if (name == "subjects-4d") return subjects_mixture();
  if (name.rfind("subject-", 0) == 0) {
    const int j = std::stoi(name.substr(8));
    if (j < 0 || j >= kSubjectCount) throw ValidationError("synth-prior: subject index out of range");
    return subject(j);
  }
  throw ValidationError("synth-prior: unknown reference prior '" + name +
                        "' (expected mixture-2d, mixture-3c-2d, subjects-4d, subject-<j>)");
}

} // namespace genrestore::reference
