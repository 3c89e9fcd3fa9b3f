#pragma once

// Summary statistics and the one-sided tests used by the ablation sweeps.

#include "genrestore/types.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace genrestore::stats {

inline double mean(const std::vector<double> &v) {
  if (v.empty()) throw ValidationError("stats::mean: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Unbiased sample variance; 0 for a single observation.
inline double variance(const std::vector<double> &v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double standard_error(const std::vector<double> &v) {
  return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

/// P(T_{dof} > t).
inline double student_upper_tail(double t, double dof) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  boost::math::students_t dist(dof);
  return boost::math::cdf(boost::math::complement(dist, t));
}

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double mean_difference = 0.0;
};

/// One-sample t-test of H1: mean(v) > 0.
inline TestResult one_sample_greater(const std::vector<double> &v) {
  if (v.size() < 2) throw ValidationError("stats: one-sided test needs at least 2 observations");
  TestResult r;
  r.mean_difference = mean(v);
  const double se = standard_error(v);
  if (se == 0.0) {
    r.statistic = r.mean_difference > 0 ? std::numeric_limits<double>::infinity()
                                        : (r.mean_difference < 0 ? -std::numeric_limits<double>::infinity() : 0.0);
    r.p_value = r.mean_difference > 0 ? 0.0 : 1.0;
    return r;
  }
  r.statistic = r.mean_difference / se;
  r.p_value = student_upper_tail(r.statistic, static_cast<double>(v.size() - 1));
  return r;
}

/// Paired t-test of H1: mean(a - b) > 0.
inline TestResult paired_greater(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.size() != b.size()) throw ValidationError("stats::paired_greater: samples differ in length");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return one_sample_greater(diff);
}

struct TrendResult {
  /// Per-trial least-squares slope against the x grid, tested for > 0.
  TestResult slope;
  /// Paired tests of H1: level j+1 < level j, one per consecutive pair.
  std::vector<TestResult> consecutive_decrease;
  bool non_decreasing = false;
};

/// Monotone non-decreasing trend check for paired observations:
/// values[j][i] is trial i at grid point x[j]. Passes when the mean per-trial
/// slope is significantly positive and no consecutive step shows a
/// significant decrease, both at level alpha.
inline TrendResult trend_non_decreasing(const std::vector<double> &x, const std::vector<std::vector<double>> &values,
                                        double alpha = 0.05) {
  if (x.size() != values.size() || x.size() < 2) throw ValidationError("stats::trend: need >= 2 grid points");
  const std::size_t n = values.front().size();
  for (const auto &col : values) {
    if (col.size() != n) throw ValidationError("stats::trend: unequal trial counts");
  }
  const double xbar = mean(x);
  double sxx = 0.0;
  for (double xi : x) sxx += (xi - xbar) * (xi - xbar);
  std::vector<double> slopes(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) slopes[i] += (x[j] - xbar) * values[j][i];
    slopes[i] /= sxx;
  }
  TrendResult r;
  r.slope = one_sample_greater(slopes);
  bool ok = r.slope.p_value < alpha;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    TestResult dec = paired_greater(values[j], values[j + 1]);
    ok = ok && dec.p_value >= alpha;
    r.consecutive_decrease.push_back(dec);
  }
  r.non_decreasing = ok;
  return r;
}

/// Standard error of a difference of two independent means using the pooled variance.
inline double pooled_standard_error(const std::vector<double> &a, const std::vector<double> &b) {
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double pooled = ((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0);
  return std::sqrt(pooled * (1.0 / na + 1.0 / nb));
}

} // namespace genrestore::stats
