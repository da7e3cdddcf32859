#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "suspense/error.hpp"
#include "suspense/io.hpp"
#include "suspense/measures.hpp"

namespace suspense {

inline constexpr std::size_t kTurningPoints = 5;

using TPIndices = std::array<std::size_t, kTurningPoints>;

/// Opportunity, Change of Plans, Point of No Return, Major Setback, Climax.
inline constexpr std::array<std::string_view, kTurningPoints> kTurningPointNames{
    "Opportunity", "ChangeOfPlans", "PointOfNoReturn", "MajorSetback", "Climax"};

/// Prior relative positions of the five turning points and the half-width of
/// the search window around each.
struct TPConfig {
  std::array<double, kTurningPoints> positions{0.10, 0.25, 0.50, 0.75, 0.90};
  std::array<double, kTurningPoints> half_widths{0.10, 0.10, 0.10, 0.10, 0.10};

  void validate() const {
    for (std::size_t k = 0; k < kTurningPoints; ++k) {
      if (!(positions[k] > 0.0 && positions[k] < 1.0))
        throw Error(ErrorKind::InvalidConfig, "turning point positions must lie in (0, 1)");
      if (!(half_widths[k] >= 0.0 && half_widths[k] < 0.5))
        throw Error(ErrorKind::InvalidConfig, "turning point windows must lie in [0, 0.5)");
      if (k > 0 && !(positions[k] > positions[k - 1]))
        throw Error(ErrorKind::InvalidConfig, "turning point positions must increase");
    }
  }
};

struct TPGold {
  std::string synopsis_id;
  TPIndices indices{};
};

struct TPPrediction {
  std::string synopsis_id;
  TPIndices indices{};
  std::string source;
};

/// Index whose relative position i/(n-1) falls in each window and maximises
/// the series; ties go to the earliest index.
inline TPIndices predict_tps(std::span<const std::optional<double>> series, const TPConfig& config) {
  config.validate();
  const std::size_t n = series.size();
  if (n < kTurningPoints) throw Error(ErrorKind::InvalidConfig, "series shorter than 5 sentences");
  constexpr double eps = 1e-12;
  TPIndices out{};
  for (std::size_t k = 0; k < kTurningPoints; ++k) {
    const double lo = std::max(0.0, config.positions[k] - config.half_widths[k]);
    const double hi = std::min(1.0, config.positions[k] + config.half_widths[k]);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < n; ++i) {
      const double rel = static_cast<double>(i) / static_cast<double>(n - 1);
      if (rel < lo - eps || rel > hi + eps || !series[i]) continue;
      if (!best || *series[i] > *series[*best]) best = i;
    }
    if (!best) throw Error(ErrorKind::EmptyWindow, "no defined value in window " + std::to_string(k + 1));
    out[k] = *best;
  }
  return out;
}

/// round(position * (n - 1)), halves rounded up.
inline std::vector<std::size_t> theory_baseline(std::size_t n, std::span<const double> positions) {
  if (n < 1) throw Error(ErrorKind::InvalidConfig, "empty synopsis");
  std::vector<std::size_t> out;
  out.reserve(positions.size());
  for (double p : positions) {
    const double x = std::floor(p * static_cast<double>(n - 1) + 0.5);
    out.push_back(static_cast<std::size_t>(std::clamp(x, 0.0, static_cast<double>(n - 1))));
  }
  return out;
}

/// Per-turning-point |pred - gold| / (n - 1) * 100.
inline std::vector<double> tp_errors(std::span<const std::size_t> pred, std::span<const std::size_t> gold,
                                     std::size_t n) {
  if (pred.size() != kTurningPoints || gold.size() != kTurningPoints)
    throw Error(ErrorKind::LengthMismatch, "expected five turning points on each side");
  if (n < 2) throw Error(ErrorKind::InvalidConfig, "synopsis needs at least 2 sentences");
  std::vector<double> err(kTurningPoints);
  for (std::size_t k = 0; k < kTurningPoints; ++k) {
    const double diff = std::fabs(static_cast<double>(pred[k]) - static_cast<double>(gold[k]));
    err[k] = diff / static_cast<double>(n - 1) * 100.0;
  }
  return err;
}

/// Normalised distance D: mean over the five turning points of the absolute
/// index error as a percentage of synopsis length.
inline double tp_distance(std::span<const std::size_t> pred, std::span<const std::size_t> gold, std::size_t n) {
  const auto err = tp_errors(pred, gold, n);
  double s = 0.0;
  for (double e : err) s += e;
  return s / static_cast<double>(kTurningPoints);
}

struct PositionStats {
  std::array<double, kTurningPoints> mean{};
  std::array<double, kTurningPoints> sd{};
};

/// Mean and sample sd of gold relative positions; a helper for choosing priors.
inline PositionStats gold_position_stats(const std::vector<TPGold>& gold, const std::vector<std::size_t>& lengths) {
  if (gold.size() != lengths.size() || gold.empty())
    throw Error(ErrorKind::LengthMismatch, "one length per gold record required");
  PositionStats st;
  for (std::size_t k = 0; k < kTurningPoints; ++k) {
    std::vector<double> rel;
    for (std::size_t i = 0; i < gold.size(); ++i)
      rel.push_back(static_cast<double>(gold[i].indices[k]) / static_cast<double>(std::max<std::size_t>(lengths[i], 2) - 1));
    double m = 0.0;
    for (double r : rel) m += r;
    m /= static_cast<double>(rel.size());
    double ss = 0.0;
    for (double r : rel) ss += (r - m) * (r - m);
    st.mean[k] = m;
    st.sd[k] = rel.size() > 1 ? std::sqrt(ss / static_cast<double>(rel.size() - 1)) : 0.0;
  }
  return st;
}

inline std::vector<TPGold> load_tp_gold(std::istream& in, const std::string& source = "<stream>") {
  std::vector<TPGold> out;
  io::for_each_jsonl(in, source, [&](const io::json& obj, std::size_t line_no) {
    TPGold g;
    g.synopsis_id = obj.at("synopsis_id").get<std::string>();
    const auto& arr = obj.at("tp_indices");
    if (!arr.is_array() || arr.size() != kTurningPoints)
      throw Error(ErrorKind::MalformedLine, io::where(source, line_no) + ": tp_indices needs 5 entries");
    for (std::size_t k = 0; k < kTurningPoints; ++k) {
      g.indices[k] = arr[k].get<std::size_t>();
      if (k > 0 && g.indices[k] < g.indices[k - 1])
        throw Error(ErrorKind::MalformedLine, io::where(source, line_no) + ": tp_indices must be nondecreasing");
    }
    out.push_back(std::move(g));
  });
  return out;
}

inline std::vector<TPGold> load_tp_gold(const std::string& path) {
  auto in = io::open_input(path);
  return load_tp_gold(in, path);
}

}  // namespace suspense
