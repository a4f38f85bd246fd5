// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "obbeval/detection.hpp"

namespace obbeval {

enum class Interpolation { kVoc11, kAllPoints };

std::string_view to_string(Interpolation interp);
/// Accepts "voc11" and "allpoints" (also "all-points").
Interpolation parse_interpolation(std::string_view text);

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_sweep_grid();

struct EvalConfig {
  double iou_threshold = 0.5;
  Interpolation interpolation = Interpolation::kVoc11;
  int n_random_runs = 10;
  std::uint64_t base_seed = 0;
  double constant_value = 1.0;
  std::vector<double> sweep_grid = default_sweep_grid();
  /// Worker threads; 0 picks the hardware concurrency. Results do not
  /// depend on this value.
  unsigned threads = 0;

  /// Throws Error(kInvalidArgument) describing the first violated
  /// constraint.
  void validate() const;
};

enum class MatchLabel { kTruePositive, kFalsePositive, kIgnored };

struct ClassMatch {
  std::vector<MatchLabel> labels;  // one per prediction, input order
  std::vector<bool> gt_matched;    // one per GT; difficult GTs stay false
};

/// Greedy one-to-one matching of one class in one image. `preds` must
/// already be in evaluation order. Each prediction takes the not yet
/// matched GT with the highest IoU (first on ties); it is a TP when that IoU
/// reaches the threshold, ignored when that GT is difficult, FP otherwise.
ClassMatch match_class(std::span<const Detection> preds,
                       std::span<const Detection> gts, double iou_threshold);

/// AP over labels sorted by descending confidence. Ignored entries are
/// skipped. Returns nullopt when there are no positives and no scored
/// predictions (the class is excluded from the mean).
std::optional<double> average_precision(std::span<const MatchLabel> ranked,
                                        std::size_t n_positives,
                                        Interpolation interp);

/// Deterministic uniform value in [0, 1) keyed by (seed, ordinal).
double random_confidence(std::uint64_t seed, std::uint64_t ordinal) noexcept;

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// 2PR / (P + R), with P and R taken as 0 when their denominators are 0.
double f1_from_counts(const ClassCounts& counts) noexcept;

struct F1Result {
  std::map<std::string, double> per_class_f1;
  std::map<std::string, ClassCounts> counts;
  double mf1 = 0.0;
};

F1Result f1_scores(const std::vector<Detection>& preds,
                   const std::vector<Detection>& gts, double iou_threshold,
                   unsigned threads = 0);

enum class RunKind { kRandom, kConstant };
std::string_view to_string(RunKind kind);

struct RunValue {
  RunKind kind = RunKind::kRandom;
  std::optional<std::uint64_t> seed;  // random runs only
  double value = 0.0;
};

struct MapNcResult {
  std::vector<RunValue> runs;  // n_random_runs random runs, then constant
  double mean = 0.0;
  double stddev = 0.0;         // population std over all runs
  std::map<std::string, double> per_class_ap;  // mean over runs
};

/// mAP with confidences replaced: n_random_runs runs with i.i.d. uniform
/// scores seeded base_seed + run index, then one run at constant_value.
MapNcResult map_nc(const std::vector<Detection>& preds,
                   const std::vector<Detection>& gts, const EvalConfig& config);

struct MetricsReport {
  std::map<std::string, double> per_class_ap;
  double map_nc_mean = 0.0;
  double map_nc_std = 0.0;
  std::vector<RunValue> map_nc_runs;
  std::map<std::string, double> per_class_f1;
  double mf1 = 0.0;
  std::map<std::string, ClassCounts> counts;
};

MetricsReport evaluate(const std::vector<Detection>& preds,
                       const std::vector<Detection>& gts,
                       const EvalConfig& config);

struct SweepPoint {
  double threshold = 0.0;
  double map_nc_mean = 0.0;
  double map_nc_std = 0.0;
  double mf1 = 0.0;
  double map_with_confidence = 0.0;  // ordinary mAP on the survivors
};

struct BestScore {
  double threshold = 0.0;
  double value = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  BestScore best_map_nc;
  BestScore best_mf1;
};

/// For each grid threshold t, drops predictions with confidence < t and
/// evaluates the survivors. Throws Error(kInvalidArgument) if any prediction
/// lacks a confidence.
SweepResult sweep_thresholds(const std::vector<Detection>& preds,
                             const std::vector<Detection>& gts,
                             const EvalConfig& config);

}  // namespace obbeval
