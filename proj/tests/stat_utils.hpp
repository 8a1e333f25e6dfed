#pragma once

// Shared statistical helpers for the randomized tests. Thresholds are chosen
// at the 0.01 significance level so a correct implementation fails any single
// check with probability about 1%; seeds are fixed, so failures are
// reproducible, not flaky.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace stat_utils {

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
// Reject at level 0.01 when D > 1.63 / sqrt(n).
inline double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double c = cdf(xs[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
  }
  return d;
}

inline double ks_one_sample_threshold(size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

// Two-sided two-sample Kolmogorov-Smirnov statistic.
// Reject at level 0.01 when D > 1.628 * sqrt((n + m) / (n * m)).
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline double ks_two_sample_threshold(size_t n, size_t m) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return 1.628 * std::sqrt((nn + mm) / (nn * mm));
}

// Pearson chi-square over bins, mapped to a standard normal deviate by the
// Wilson-Hilferty cube-root transform. Reject at level 0.01 when z > 2.3263.
inline double chi2_wh_z(const std::vector<double>& observed, const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi2_wh_z: size mismatch");
  double chi2 = 0.0;
  int dof = -1;  // one constraint: totals match
  for (size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) throw std::invalid_argument("chi2_wh_z: nonpositive expected count");
    const double diff = observed[i] - expected[i];
    chi2 += diff * diff / expected[i];
    ++dof;
  }
  if (dof < 1) throw std::invalid_argument("chi2_wh_z: need at least 2 bins");
  const double k = static_cast<double>(dof);
  const double c = 2.0 / (9.0 * k);
  return (std::cbrt(chi2 / k) - (1.0 - c)) / std::sqrt(c);
}

constexpr double kZ99 = 2.3263478740408408;

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace stat_utils
