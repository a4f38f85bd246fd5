// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "obbeval/error.hpp"
#include "obbeval/metrics.hpp"

namespace obbeval {

std::string_view to_string(Interpolation interp) {
  return interp == Interpolation::kVoc11 ? "voc11" : "allpoints";
}

Interpolation parse_interpolation(std::string_view text) {
  if (text == "voc11") return Interpolation::kVoc11;
  if (text == "allpoints" || text == "all-points") {
    return Interpolation::kAllPoints;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "unknown interpolation '" + std::string(text) +
                  "' (expected voc11 or allpoints)");
}

std::vector<double> default_sweep_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(i / 20.0);
  return grid;
}

void EvalConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorKind::kInvalidArgument, msg);
  };
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    fail("iou threshold must lie in (0, 1)");
  }
  if (n_random_runs < 1) fail("number of random runs must be >= 1");
  if (!std::isfinite(constant_value)) fail("constant value must be finite");
  for (std::size_t i = 0; i < sweep_grid.size(); ++i) {
    const double t = sweep_grid[i];
    if (!(t > 0.0 && t < 1.0)) fail("sweep thresholds must lie in (0, 1)");
    if (i > 0 && !(t > sweep_grid[i - 1])) {
      fail("sweep grid must be strictly increasing");
    }
  }
}

std::optional<double> average_precision(std::span<const MatchLabel> ranked,
                                        std::size_t n_positives,
                                        Interpolation interp) {
  std::vector<std::size_t> tp_prefix;
  std::vector<double> precision;
  std::size_t tp = 0;
  std::size_t seen = 0;
  for (const MatchLabel label : ranked) {
    if (label == MatchLabel::kIgnored) continue;
    ++seen;
    if (label == MatchLabel::kTruePositive) ++tp;
    tp_prefix.push_back(tp);
    precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
  }
  if (n_positives == 0) {
    if (seen == 0) return std::nullopt;
    return 0.0;
  }
  if (seen == 0) return 0.0;

  const std::size_t n = precision.size();
  if (interp == Interpolation::kVoc11) {
    // Anchor r = i / 10 is reached when 10 * tp >= i * n_positives.
    double sum = 0.0;
    for (std::size_t i = 0; i <= 10; ++i) {
      double best = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (10 * tp_prefix[k] >= i * n_positives) {
          best = std::max(best, precision[k]);
        }
      }
      sum += best;
    }
    return sum / 11.0;
  }

  // All points: precision envelope from the right, integrated over the
  // recall steps.
  std::vector<double> envelope(precision);
  for (std::size_t k = n; k-- > 1;) {
    envelope[k - 1] = std::max(envelope[k - 1], envelope[k]);
  }
  double area = 0.0;
  std::size_t prev_tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (tp_prefix[k] != prev_tp) {
      area += static_cast<double>(tp_prefix[k] - prev_tp) /
              static_cast<double>(n_positives) * envelope[k];
      prev_tp = tp_prefix[k];
    }
  }
  return area;
}

double random_confidence(std::uint64_t seed, std::uint64_t ordinal) noexcept {
  // splitmix64 finalizer applied to a (seed, ordinal) counter.
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  const std::uint64_t bits = mix(mix(seed) ^ mix(ordinal ^ 0xD1B54A32D192ED03ULL));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double f1_from_counts(const ClassCounts& c) noexcept {
  const double p = (c.tp + c.fp) == 0
                       ? 0.0
                       : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double r = (c.tp + c.fn) == 0
                       ? 0.0
                       : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

}  // namespace obbeval
