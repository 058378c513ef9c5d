#pragma once

// Independent reference implementations used to check the library: naive
// loops, brute-force window recomputation, and simple statistical tests.
// Nothing here shares code with the implementation paths under test.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

inline int sign_bit(double z) { return z >= 0.0 ? 1 : -1; }

// Naive three-term second differences.
inline std::vector<double> naive_second_diff(const Eigen::ArrayXd& x) {
  std::vector<double> out;
  for (Eigen::Index k = 0; k + 2 < x.size(); ++k)
    out.push_back(x[k + 2] - 2.0 * x[k + 1] + x[k]);
  return out;
}

// Naive IBS as a plain double loop over the definition.
inline double naive_ibs(const Eigen::ArrayXd& x, long* count_out = nullptr) {
  std::vector<double> d = naive_second_diff(x);
  long agree = 0;
  for (std::size_t k = 0; k + 1 < d.size(); ++k)
    agree += (sign_bit(d[k]) == sign_bit(d[k + 1])) ? 1 : 0;
  if (count_out) *count_out = agree;
  return static_cast<double>(agree) / static_cast<double>(d.size() - 1);
}

// Windowed psi average over the box (k, k+A], recomputed from scratch.
inline double naive_windowed_ibs(const Eigen::ArrayXd& x, Eigen::Index k, Eigen::Index a,
                                 long* count_out = nullptr) {
  std::vector<double> d = naive_second_diff(x);
  long agree = 0;
  for (Eigen::Index j = k + 1; j <= k + a; ++j)
    agree += (sign_bit(d[j]) == sign_bit(d[j + 1])) ? 1 : 0;
  if (count_out) *count_out = agree;
  return static_cast<double>(agree) / static_cast<double>(a);
}

// Naive O(nA) filtered derivative over the valid k range; returns the
// integer count difference per position so comparisons can be exact.
inline std::vector<long> naive_filtered_derivative_counts(const Eigen::ArrayXd& x,
                                                          Eigen::Index a) {
  std::vector<double> d = naive_second_diff(x);
  const Eigen::Index pairs = static_cast<Eigen::Index>(d.size()) - 1;
  std::vector<long> out;
  for (Eigen::Index k = a; k + a <= pairs - 1; ++k) {
    long right = 0, left = 0;
    for (Eigen::Index j = k + 1; j <= k + a; ++j)
      right += (sign_bit(d[j]) == sign_bit(d[j + 1])) ? 1 : 0;
    for (Eigen::Index j = k - a + 1; j <= k; ++j)
      left += (sign_bit(d[j]) == sign_bit(d[j + 1])) ? 1 : 0;
    out.push_back(right - left);
  }
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

// Empirical correlation of consecutive entries of a series.
inline double lag1_correlation(const std::vector<double>& v) {
  const double m = mean(v);
  double num = 0, den = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) num += (v[i] - m) * (v[i + 1] - m);
  for (double x : v) den += (x - m) * (x - m);
  return num / den;
}

inline double normal_cdf_ref(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample Kolmogorov-Smirnov statistic against N(0,1).
inline double ks_statistic_normal(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = normal_cdf_ref(v[i]);
    d = std::max(d, std::max(f - i / n, (i + 1) / n - f));
  }
  return d;
}

// Asymptotic KS critical value: c(alpha)/sqrt(n); c(0.01) = 1.6276.
inline double ks_critical_001(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace oracle
