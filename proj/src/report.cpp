// SPDX-License-Identifier: Apache-2.0
#include "obbeval/report.hpp"

#include <set>

#include "obbeval/detection_io.hpp"

namespace obbeval {

using nlohmann::json;

json to_json(const EvalConfig& config) {
  return json{{"iou_threshold", config.iou_threshold},
              {"interpolation", std::string(to_string(config.interpolation))},
              {"n_random_runs", config.n_random_runs},
              {"base_seed", config.base_seed},
              {"constant_value", config.constant_value},
              {"sweep_grid", config.sweep_grid}};
}

json to_json(const MetricsReport& report) {
  json runs = json::array();
  for (const auto& r : report.map_nc_runs) {
    runs.push_back({{"kind", std::string(to_string(r.kind))},
                    {"seed", r.seed ? json(*r.seed) : json(nullptr)},
                    {"value", r.value}});
  }
  json per_class = json::object();
  std::set<std::string> names;
  for (const auto& [name, _] : report.per_class_ap) names.insert(name);
  for (const auto& [name, _] : report.per_class_f1) names.insert(name);
  for (const auto& name : names) {
    json entry;
    const auto ap = report.per_class_ap.find(name);
    entry["ap"] = ap == report.per_class_ap.end() ? json(nullptr) : json(ap->second);
    const auto f1 = report.per_class_f1.find(name);
    entry["f1"] = f1 == report.per_class_f1.end() ? json(nullptr) : json(f1->second);
    const auto c = report.counts.find(name);
    const ClassCounts counts = c == report.counts.end() ? ClassCounts{} : c->second;
    entry["tp"] = counts.tp;
    entry["fp"] = counts.fp;
    entry["fn"] = counts.fn;
    per_class[name] = std::move(entry);
  }
  return json{{"map_nc", {{"mean", report.map_nc_mean},
                          {"std", report.map_nc_std},
                          {"runs", std::move(runs)}}},
              {"mf1", report.mf1},
              {"per_class", std::move(per_class)}};
}

json to_json(const SweepResult& sweep) {
  json points = json::array();
  for (const auto& p : sweep.points) {
    points.push_back({{"threshold", p.threshold},
                      {"map_nc_mean", p.map_nc_mean},
                      {"map_nc_std", p.map_nc_std},
                      {"mf1", p.mf1},
                      {"map_with_confidence", p.map_with_confidence}});
  }
  return json{{"points", std::move(points)},
              {"best_map_nc", {{"threshold", sweep.best_map_nc.threshold},
                               {"value", sweep.best_map_nc.value}}},
              {"best_mf1", {{"threshold", sweep.best_mf1.threshold},
                            {"value", sweep.best_mf1.value}}}};
}

std::string metrics_csv(const MetricsReport& report) {
  std::string out = "class,ap,f1,tp,fp,fn\n";
  const json j = to_json(report);
  for (const auto& [name, entry] : j["per_class"].items()) {
    auto num = [](const json& v) {
      return v.is_null() ? std::string() : format_number(v.get<double>());
    };
    // Quote names that would break the row.
    std::string cell = name;
    if (cell.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (const char ch : cell) {
        if (ch == '"') quoted += '"';
        quoted += ch;
      }
      cell = quoted + "\"";
    }
    out += cell + "," + num(entry["ap"]) + "," + num(entry["f1"]) + "," +
           std::to_string(entry["tp"].get<std::size_t>()) + "," +
           std::to_string(entry["fp"].get<std::size_t>()) + "," +
           std::to_string(entry["fn"].get<std::size_t>()) + "\n";
  }
  return out;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out =
      "threshold,map_nc_mean,map_nc_std,map_nc_lower,map_nc_upper,mf1,"
      "map_with_confidence\n";
  for (const auto& p : sweep.points) {
    out += format_number(p.threshold) + "," + format_number(p.map_nc_mean) + "," +
           format_number(p.map_nc_std) + "," +
           format_number(p.map_nc_mean - p.map_nc_std) + "," +
           format_number(p.map_nc_mean + p.map_nc_std) + "," +
           format_number(p.mf1) + "," + format_number(p.map_with_confidence) + "\n";
  }
  return out;
}

json warnings_json(const std::vector<ImageWarnings>& per_image) {
  json summary = json::object();
  for (const auto kind : {WarningKind::kUnknownCategory, WarningKind::kDanglingCoordinates,
                          WarningKind::kOutOfRangeBin, WarningKind::kEmptyResponse}) {
    summary[std::string(to_string(kind))] = 0;
  }
  json images = json::array();
  for (const auto& img : per_image) {
    if (img.warnings.empty()) continue;
    json list = json::array();
    for (const auto& w : img.warnings) {
      const std::string kind(to_string(w.kind));
      summary[kind] = summary[kind].get<int>() + 1;
      list.push_back({{"kind", kind},
                      {"begin", w.begin},
                      {"end", w.end},
                      {"message", w.message}});
    }
    images.push_back({{"image_id", img.image_id}, {"warnings", std::move(list)}});
  }
  return json{{"summary", std::move(summary)}, {"images", std::move(images)}};
}

json corpus_manifest(const std::vector<Corpus>& sources, const Corpus& merged,
                     const std::string& strategy,
                     const std::vector<std::size_t>& repetition) {
  json src = json::array();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    src.push_back({{"name", sources[i].name},
                   {"size", sources[i].samples.size()},
                   {"repetition", i < repetition.size() ? repetition[i] : 1}});
  }
  json samples = json::array();
  for (const auto& s : merged.samples) samples.push_back(s.image_id);
  return json{{"name", merged.name},
              {"strategy", strategy},
              {"size", merged.samples.size()},
              {"categories", merged.category_set.names()},
              {"sources", std::move(src)},
              {"samples", std::move(samples)}};
}

}  // namespace obbeval
