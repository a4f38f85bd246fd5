// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "obbeval/codec.hpp"
#include "obbeval/dataset.hpp"
#include "obbeval/metrics.hpp"

namespace obbeval {

// JSON field names:
//   config   {iou_threshold, interpolation, n_random_runs, base_seed,
//             constant_value, sweep_grid}
//   map_nc   {mean, std, runs: [{kind, seed, value}]}
//   mf1
//   per_class {<name>: {ap, f1, tp, fp, fn}}
//   sweep    {points: [{threshold, map_nc_mean, map_nc_std, mf1,
//             map_with_confidence}], best_map_nc: {threshold, value},
//             best_mf1: {threshold, value}}
nlohmann::json to_json(const EvalConfig& config);
nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const SweepResult& sweep);

/// class,ap,f1,tp,fp,fn
std::string metrics_csv(const MetricsReport& report);

/// threshold,map_nc_mean,map_nc_std,map_nc_lower,map_nc_upper,mf1,
/// map_with_confidence (lower/upper = mean -/+ std, the error band).
std::string sweep_csv(const SweepResult& sweep);

struct ImageWarnings {
  std::string image_id;
  std::vector<ParseWarning> warnings;
};

/// {summary: {<kind>: count}, images: [{image_id, warnings: [{kind, begin,
/// end, message}]}]}; images without warnings are omitted.
nlohmann::json warnings_json(const std::vector<ImageWarnings>& per_image);

/// {name, strategy, size, categories, sources: [{name, size, repetition}],
/// samples: [image ids in order]}
nlohmann::json corpus_manifest(const std::vector<Corpus>& sources,
                               const Corpus& merged, const std::string& strategy,
                               const std::vector<std::size_t>& repetition);

}  // namespace obbeval
