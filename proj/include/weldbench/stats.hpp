#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "weldbench/errors.hpp"

namespace weldbench::stats {

// Pairwise (cascade) summation; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

inline MeanEstimate mean_stderr(std::span<const double> x) {
  MeanEstimate out;
  out.n = x.size();
  if (x.empty()) return out;
  out.mean = pairwise_sum(x) / static_cast<double>(x.size());
  if (x.size() < 2) return out;
  std::vector<double> dev(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - out.mean) * (x[i] - out.mean);
  const double var = pairwise_sum(dev) / static_cast<double>(x.size() - 1);
  out.stddev = std::sqrt(var);
  out.stderr_ = out.stddev / std::sqrt(static_cast<double>(x.size()));
  return out;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Upper tail of the Kolmogorov distribution, Q(l) = 2 sum (-1)^{k-1} exp(-2 k^2 l^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  if (lambda < 1.18) {
    // Dual series, accurate for small lambda.
    const double y = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda));
    double s = 0.0;
    for (int k = 1; k <= 9; k += 2) s += std::pow(y, k * k);
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s;
  }
  double s = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

inline KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw PreconditionError("KS test needs a nonempty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double en = std::sqrt(n);
  return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

// Weighted least squares y = intercept + slope x with weights w (default 1).
inline LineFit fit_line(std::span<const double> x, std::span<const double> y,
                        std::span<const double> w = {}) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit_line needs >= 2 points");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
    sxx += wi * x[i] * x[i];
    sxy += wi * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  LineFit out;
  out.slope = (sw * sxy - sx * sy) / det;
  out.intercept = (sy - out.slope * sx) / sw;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double wi = w.empty() ? 1.0 : w[i];
      const double r = y[i] - out.intercept - out.slope * x[i];
      rss += wi * r * r;
    }
    out.slope_stderr = std::sqrt(rss / (x.size() - 2) * sw / det);
  }
  return out;
}

}  // namespace weldbench::stats
