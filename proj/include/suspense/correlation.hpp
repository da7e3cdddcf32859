#pragma once

// Rank correlation and confidence intervals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "suspense/error.hpp"

namespace suspense {

/// Keeps positions present in both series, in order.
inline std::pair<std::vector<double>, std::vector<double>> align_present(std::span<const std::optional<double>> a,
                                                                         std::span<const std::optional<double>> b) {
  std::pair<std::vector<double>, std::vector<double>> out;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] && b[i]) {
      out.first.push_back(*a[i]);
      out.second.push_back(*b[i]);
    }
  return out;
}

/// 1-based fractional ranks; tied values share the average of their ranks.
inline std::vector<double> fractional_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1 .. j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "pearson inputs differ in length");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw Error(ErrorKind::DegenerateSeries, "zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace detail {

inline void require_correlatable(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "correlation inputs differ in length");
  if (a.size() < 3) throw Error(ErrorKind::DegenerateSeries, "need at least 3 aligned values");
}

}  // namespace detail

/// Spearman's rho: Pearson correlation of average ranks.
inline double spearman(std::span<const double> a, std::span<const double> b) {
  detail::require_correlatable(a, b);
  const auto ra = fractional_ranks(a);
  const auto rb = fractional_ranks(b);
  return pearson(ra, rb);
}

namespace detail {

// Merge sort on `v` returning the number of inversions (Knight 1966).
inline std::uint64_t count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = count_swaps(v, buf, lo, mid) + count_swaps(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      buf[k++] = v[j++];
      swaps += mid - i;
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Sum over tie groups of t(t-1)/2 in an already sorted sequence, grouped by `same`.
template <typename Same>
std::uint64_t tied_pairs(std::size_t n, Same same) {
  std::uint64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && same(i - 1, i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace detail

/// Kendall's tau-b in O(n log n).
inline double kendall(std::span<const double> a, std::span<const double> b) {
  detail::require_correlatable(a, b);
  const std::size_t n = a.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i] != a[j] ? a[i] < a[j] : b[i] < b[j];
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = a[order[i]];
    ys[i] = b[order[i]];
  }
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t ties_a = detail::tied_pairs(n, [&](std::size_t i, std::size_t j) { return xs[i] == xs[j]; });
  const std::uint64_t ties_ab =
      detail::tied_pairs(n, [&](std::size_t i, std::size_t j) { return xs[i] == xs[j] && ys[i] == ys[j]; });
  std::vector<double> buf(n);
  const std::uint64_t swaps = detail::count_swaps(ys, buf, 0, n);
  const std::uint64_t ties_b = detail::tied_pairs(n, [&](std::size_t i, std::size_t j) { return ys[i] == ys[j]; });

  const double denom = std::sqrt(static_cast<double>(n0 - ties_a) * static_cast<double>(n0 - ties_b));
  if (denom == 0.0) throw Error(ErrorKind::DegenerateSeries, "a series is constant");
  // concordant - discordant = n0 - ties_a - ties_b + ties_ab - 2 * swaps
  const double s = static_cast<double>(n0) - static_cast<double>(ties_a) - static_cast<double>(ties_b) +
                   static_cast<double>(ties_ab) - 2.0 * static_cast<double>(swaps);
  return std::clamp(s / denom, -1.0, 1.0);
}

/// Two-sided standard normal critical value z_{1-p/2}.
inline double normal_critical_value(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidConfig, "significance level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - p / 2.0);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Confidence interval for a correlation via the Fisher z-transformation.
inline Interval fisher_ci(double r, std::size_t n, double p = 0.05) {
  if (n <= 3) throw Error(ErrorKind::TooFewSamples, "Fisher interval needs n > 3");
  if (!(r > -1.0 && r < 1.0)) throw Error(ErrorKind::OutOfRange, "correlation must lie in (-1, 1)");
  const double z = std::atanh(r);
  const double hw = normal_critical_value(p) / std::sqrt(static_cast<double>(n) - 3.0);
  return {std::tanh(z - hw), std::tanh(z + hw)};
}

}  // namespace suspense
