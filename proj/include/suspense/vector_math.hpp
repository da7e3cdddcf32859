#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "suspense/error.hpp"

namespace suspense {

using Vector = std::vector<double>;

inline void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::DimMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::ZeroNormVector, "cosine of a zero-norm vector");
  const double c = dot(a, b) / (na * nb);
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

inline void normalize_in_place(Vector& v) {
  const double n = l2_norm(v);
  if (n == 0.0) throw Error(ErrorKind::ZeroNormVector, "cannot normalise a zero vector");
  for (double& x : v) x /= n;
}

}  // namespace suspense
