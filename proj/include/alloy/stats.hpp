#pragma once

// Small statistics toolkit for the Monte Carlo experiments.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "alloy/parallel.hpp"

namespace alloy::stats {

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Mean and standard error with order-fixed pairwise summation.
inline Summary summarize(std::span<const double> v) {
  Summary s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = pairwise_sum(v) / static_cast<double>(v.size());
  if (v.size() > 1) {
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - s.mean) * (v[i] - s.mean);
    const double var = pairwise_sum(dev) / static_cast<double>(v.size() - 1);
    s.std_error = std::sqrt(var / static_cast<double>(v.size()));
  }
  return s;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
  double slope_lo = 0.0;  // 95% confidence interval for the slope
  double slope_hi = 0.0;
  std::size_t n = 0;
};

inline double student_t_quantile(double p, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, p);
}

/// Ordinary least squares y = intercept + slope * x with a 95% interval on the
/// slope. Optional weights are inverse variances.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w = {}) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit needs at least two paired points");
  if (!w.empty() && w.size() != x.size()) throw std::invalid_argument("linear_fit weight size mismatch");
  const std::size_t n = x.size();
  auto weight = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += weight(i);
    sx += weight(i) * x[i];
    sy += weight(i) * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += weight(i) * (x[i] - mx) * (x[i] - mx);
    sxy += weight(i) * (x[i] - mx) * (y[i] - my);
    syy += weight(i) * (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.n = n;
  if (sxx <= 0) throw std::invalid_argument("linear_fit needs at least two distinct abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += weight(i) * r * r;
  }
  f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  if (n > 2) {
    f.slope_se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    const double q = student_t_quantile(0.975, static_cast<double>(n - 2));
    f.slope_lo = f.slope - q * f.slope_se;
    f.slope_hi = f.slope + q * f.slope_se;
  } else {
    f.slope_lo = f.slope_hi = f.slope;
  }
  return f;
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion at ~95% (z = 1.96).
inline Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054) {
  if (n == 0) return {0.0, 1.0};
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double nn = static_cast<double>(n);
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Average ranks (1-based), ties share the mean rank.
inline std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double m = (n + 1) / 2;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - m) * (ry[i] - m);
    sxx += (rx[i] - m) * (rx[i] - m);
    syy += (ry[i] - m) * (ry[i] - m);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Two-sided Mann-Whitney U test p-value (normal approximation with tie
/// correction).
inline double mann_whitney_p(std::span<const double> a, std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  auto r = ranks(all);
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  double r1 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += r[i];
  const double u1 = r1 - n1 * (n1 + 1) / 2;
  const double mu = n1 * n2 / 2;
  std::vector<double> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  double tie = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie += t * t * t - t;
    i = j + 1;
  }
  const double n = n1 + n2;
  const double sigma = std::sqrt(n1 * n2 / 12 * ((n + 1) - tie / (n * (n - 1))));
  if (sigma == 0) return 1.0;
  const double zscore = std::abs(u1 - mu) / sigma;
  boost::math::normal nd;
  return 2 * boost::math::cdf(boost::math::complement(nd, zscore));
}

/// Kolmogorov-Smirnov statistic sup |F_n - F| of a sample against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace alloy::stats
