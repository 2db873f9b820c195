#pragma once

// Correlation statistics for the study pipelines: sample Pearson r and
// Spearman rho (Pearson of average-tied ranks), plus the two-sided p-value
// for Pearson under the t approximation.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "ndar/common.hpp"

namespace ndar {

struct Correlation {
  double pearson_r = 0.0;
  double spearman_rho = 0.0;
};

namespace detail {

inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const std::size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw StatError("correlation undefined: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

/// Average ranks (1-based), ties get the mean of their rank range.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Regularized incomplete beta via continued fraction (Lentz), for the
/// Student-t tail used in the Pearson significance test.
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_beta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  const double front = std::exp(ln_beta + a * std::log(x) + b * std::log(1.0 - x));
  const bool swap_tail = x > (a + 1.0) / (a + b + 2.0);
  if (swap_tail) return 1.0 - incomplete_beta(b, a, 1.0 - x);
  double c = 1.0, d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < 1e-300) d = 1e-300;
  d = 1.0 / d;
  double result = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = 1.0 + num / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    result *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = 1.0 + num / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    result *= delta;
    if (std::fabs(delta - 1.0) < 1e-14) break;
  }
  return front * result / a;
}

}  // namespace detail

inline Correlation correlation(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw StatError("correlation requires >= 3 pairs");
  std::vector<double> x(pairs.size()), y(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    x[i] = pairs[i].first;
    y[i] = pairs[i].second;
  }
  Correlation c;
  c.pearson_r = detail::pearson(x, y);
  c.spearman_rho =
      detail::pearson(detail::average_ranks(x), detail::average_ranks(y));
  return c;
}

/// Two-sided p-value for Pearson r with n samples (t distribution with n-2
/// degrees of freedom).
inline double pearson_p_value(double r, std::size_t n) {
  if (n < 3) throw StatError("p-value requires n >= 3");
  const double df = double(n - 2);
  if (std::fabs(r) >= 1.0) return 0.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  const double x = df / (df + t * t);
  return detail::incomplete_beta(0.5 * df, 0.5, x);
}

struct Histogram {
  std::vector<double> edges;   // size bins+1
  std::vector<double> counts;  // normalized when density=true
};

inline Histogram histogram(const std::vector<double>& values, double lo,
                           double hi, int bins, bool density = true) {
  if (bins < 1 || !(hi > lo)) throw ConfigError("invalid histogram spec");
  Histogram h;
  h.edges.resize(bins + 1);
  h.counts.assign(bins, 0.0);
  const double w = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges[b] = lo + b * w;
  for (double v : values) {
    int b = int((v - lo) / w);
    b = std::clamp(b, 0, bins - 1);
    h.counts[b] += 1.0;
  }
  if (density && !values.empty())
    for (auto& c : h.counts) c /= double(values.size());
  return h;
}

}  // namespace ndar
