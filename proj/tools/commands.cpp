// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "obbeval/codec.hpp"
#include "obbeval/dataset.hpp"
#include "obbeval/detection_io.hpp"
#include "obbeval/error.hpp"
#include "obbeval/metrics.hpp"
#include "obbeval/render.hpp"
#include "obbeval/report.hpp"

namespace obbeval::cli {
namespace fs = std::filesystem;
namespace {

constexpr const char* kVersion = "0.3.0";

struct SizeOptions {
  std::string image_size = "1024x1024";
  std::string sidecar;

  ImageSizeSource resolve() const {
    const ImageSize fallback = parse_image_size(image_size);
    if (sidecar.empty()) return ImageSizeSource{fallback, {}};
    return ImageSizeSource::from_sidecar(sidecar, fallback);
  }
};

void add_size_options(CLI::App* cmd, SizeOptions& opts) {
  cmd->add_option("--image-size", opts.image_size,
                  "Image size WxH used for quantization")
      ->envname("OBBEVAL_IMAGE_SIZE")
      ->capture_default_str();
  cmd->add_option("--image-sizes", opts.sidecar,
                  "JSON sidecar {image_id: {width, height}}")
      ->check(CLI::ExistingFile);
}

struct EncodeArgs {
  std::string gt_dir;
  std::string categories;
  std::string out;
  SizeOptions sizes;
};

struct DecodeArgs {
  std::string responses;
  std::string categories;
  std::string out;
  std::string warnings;
  SizeOptions sizes;
};

struct EvalArgs {
  std::string preds;
  std::string gt_dir;
  std::string categories;
  std::string out;
  std::string csv;
  std::string sweep_csv;
  std::string interp = "voc11";
  std::vector<double> sweep_grid;
  bool sweep = false;
  EvalConfig config;
};

struct MergeArgs {
  std::vector<std::string> dirs;
  std::string strategy = "concat";
  std::string out;
  std::string categories;
  std::vector<std::size_t> factors;
};

struct RenderArgs {
  std::string detections;
  std::string out_dir;
  std::vector<std::string> image_ids;
  SizeOptions sizes;
};

std::optional<CategorySet> maybe_categories(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return read_categories(path);
}

int do_encode(const EncodeArgs& a, std::ostream& out) {
  const ImageSizeSource sizes = a.sizes.resolve();
  const CategorySet categories = read_categories(a.categories);
  const Corpus corpus = load_dota(a.gt_dir, categories, sizes);
  std::vector<ResponseRecord> records;
  for (const auto& s : corpus.samples) {
    try {
      records.push_back(
          {s.image_id, serialize(s.gts, categories, s.image_width, s.image_height).text});
    } catch (const Error& e) {
      throw Error(e.kind(), s.image_id + ": " + e.what());
    }
  }
  write_responses(a.out, records);
  out << "encoded " << records.size() << " image(s) -> " << a.out << "\n";
  return 0;
}

int do_decode(const DecodeArgs& a, std::ostream& out) {
  const ImageSizeSource sizes = a.sizes.resolve();
  const CategorySet categories = read_categories(a.categories);
  const auto records = read_responses(a.responses);
  std::vector<Detection> all;
  std::vector<ImageWarnings> warnings;
  for (const auto& r : records) {
    const ImageSize size = sizes.lookup(r.image_id);
    ParseReport report = parse({r.response, size.width, size.height}, categories);
    for (auto& d : report.detections) {
      d.image_id = r.image_id;
      all.push_back(std::move(d));
    }
    warnings.push_back({r.image_id, std::move(report.warnings)});
  }
  write_detections(a.out, all);
  const std::string warn_path = a.warnings.empty() ? a.out + ".warnings.json" : a.warnings;
  const auto wj = warnings_json(warnings);
  write_text(warn_path, wj.dump(2) + "\n");
  std::size_t n_warn = 0;
  for (const auto& [kind, count] : wj["summary"].items()) n_warn += count.get<std::size_t>();
  out << "decoded " << all.size() << " detection(s) from " << records.size()
      << " response(s), " << n_warn << " warning(s) -> " << warn_path << "\n";
  return 0;
}

int do_eval(EvalArgs a, std::ostream& out) {
  a.config.interpolation = parse_interpolation(a.interp);
  if (!a.sweep_grid.empty()) a.config.sweep_grid = a.sweep_grid;
  a.config.validate();

  const auto categories = maybe_categories(a.categories);
  const Corpus corpus = load_dota(a.gt_dir, categories, ImageSizeSource{},
                                  a.config.threads);
  std::vector<Detection> gts;
  std::set<std::string> known_ids;
  for (const auto& s : corpus.samples) {
    known_ids.insert(s.image_id);
    gts.insert(gts.end(), s.gts.begin(), s.gts.end());
  }

  std::vector<Detection> preds = read_detections(a.preds);
  std::set<std::string> unknown_ids;
  std::set<std::string> unknown_categories;
  for (auto& p : preds) {
    if (!known_ids.contains(p.image_id)) unknown_ids.insert(p.image_id);
    if (categories) {
      if (const auto idx = categories->find(p.category)) {
        p.category = (*categories)[*idx];
      } else {
        unknown_categories.insert(p.category);
      }
    }
  }
  if (!unknown_ids.empty()) {
    std::string list;
    for (const auto& id : unknown_ids) list += "\n  " + id;
    throw Error(ErrorKind::kInvalidArgument,
                std::to_string(unknown_ids.size()) +
                    " prediction image id(s) not found in " + a.gt_dir + ":" + list);
  }
  if (!unknown_categories.empty()) {
    std::string list;
    for (const auto& c : unknown_categories) list += "\n  " + c;
    throw Error(ErrorKind::kUnknownCategory,
                "predictions use categories outside the category set:" + list);
  }
  if (a.sweep) {
    for (const auto& p : preds) {
      if (!p.confidence) {
        throw Error(ErrorKind::kInvalidArgument,
                    "--sweep needs a confidence column on every prediction");
      }
    }
  }

  const MetricsReport report = evaluate(preds, gts, a.config);
  nlohmann::json doc;
  doc["version"] = kVersion;
  doc["config"] = to_json(a.config);
  doc["counts"] = {{"images", corpus.samples.size()},
                   {"predictions", preds.size()},
                   {"ground_truths", gts.size()}};
  doc["report"] = to_json(report);
  std::optional<SweepResult> sweep;
  if (a.sweep) {
    sweep = sweep_thresholds(preds, gts, a.config);
    doc["sweep"] = to_json(*sweep);
  }

  const std::string text = doc.dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(a.out, text);
    out << "mAP_nc " << format_number(report.map_nc_mean) << " (std "
        << format_number(report.map_nc_std) << "), mF1 " << format_number(report.mf1)
        << " -> " << a.out << "\n";
  }
  if (!a.csv.empty()) write_text(a.csv, metrics_csv(report));
  if (sweep && !a.sweep_csv.empty()) write_text(a.sweep_csv, sweep_csv(*sweep));
  return 0;
}

int do_merge(const MergeArgs& a, std::ostream& out) {
  const auto categories = maybe_categories(a.categories);
  std::vector<Corpus> corpora;
  for (const auto& dir : a.dirs) {
    corpora.push_back(load_dota(dir, categories, ImageSizeSource{}));
  }
  Corpus merged;
  std::vector<std::size_t> reps(corpora.size(), 1);
  if (a.strategy == "balanced") {
    reps = a.factors.empty() ? balanced_factors(corpora) : a.factors;
    merged = merge_balanced(corpora, reps);
  } else {
    merged = merge_concat(corpora);
  }
  const auto manifest = corpus_manifest(corpora, merged, a.strategy, reps);
  write_text(a.out, manifest.dump(2) + "\n");
  out << a.strategy << " merge of " << corpora.size() << " corpora: "
      << merged.samples.size() << " sample(s) -> " << a.out << "\n";
  return 0;
}

int do_render(const RenderArgs& a, std::ostream& out) {
  const ImageSizeSource sizes = a.sizes.resolve();
  const auto dets = read_detections(a.detections);
  std::map<std::string, std::vector<Detection>> by_image;
  for (const auto& id : a.image_ids) by_image[id];
  for (const auto& d : dets) by_image[d.image_id].push_back(d);
  fs::create_directories(a.out_dir);
  for (const auto& [id, list] : by_image) {
    write_text(fs::path(a.out_dir) / (id + ".svg"),
               render_svg(id, sizes.lookup(id), list));
  }
  out << "rendered " << by_image.size() << " image(s) -> " << a.out_dir << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Oriented-box response codec and confidence-free detection metrics",
               "obbeval"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Serialize DOTA annotations into responses");
  encode->add_option("gt_dir", enc.gt_dir, "DOTA label directory")
      ->required()->check(CLI::ExistingDirectory);
  encode->add_option("--categories", enc.categories, "Category list, one per line")
      ->required()->check(CLI::ExistingFile);
  encode->add_option("-o,--out", enc.out, "Output responses file")->required();
  add_size_options(encode, enc.sizes);

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "Parse responses into a detections file");
  decode->add_option("responses", dec.responses, "Responses file (image_id<TAB>text)")
      ->required()->check(CLI::ExistingFile);
  decode->add_option("--categories", dec.categories, "Category list, one per line")
      ->required()->check(CLI::ExistingFile);
  decode->add_option("-o,--out", dec.out, "Output detections file")->required();
  decode->add_option("--warnings", dec.warnings,
                     "Warning report path (default <out>.warnings.json)");
  add_size_options(decode, dec.sizes);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Compute mAP_nc and mF1");
  eval->add_option("preds", ev.preds, "Detections file")
      ->required()->check(CLI::ExistingFile);
  eval->add_option("gt_dir", ev.gt_dir, "DOTA label directory")
      ->required()->check(CLI::ExistingDirectory);
  eval->add_option("--categories", ev.categories, "Category list, one per line")
      ->check(CLI::ExistingFile);
  eval->add_option("--iou-thr", ev.config.iou_threshold, "IoU threshold for a match")
      ->envname("OBBEVAL_IOU_THR")->capture_default_str();
  eval->add_option("--interp", ev.interp, "AP interpolation")
      ->envname("OBBEVAL_INTERP")
      ->check(CLI::IsMember({"voc11", "allpoints", "all-points"}))
      ->capture_default_str();
  eval->add_option("--runs", ev.config.n_random_runs, "Random-confidence runs")
      ->envname("OBBEVAL_RUNS")->capture_default_str();
  eval->add_option("--seed", ev.config.base_seed, "Base seed for random runs")
      ->envname("OBBEVAL_SEED")->capture_default_str();
  eval->add_option("--constant", ev.config.constant_value,
                   "Confidence used by the constant run")
      ->envname("OBBEVAL_CONSTANT")->capture_default_str();
  eval->add_option("--threads", ev.config.threads, "Worker threads (0 = all cores)")
      ->envname("OBBEVAL_THREADS")->capture_default_str();
  auto* sweep_flag = eval->add_flag("--sweep", ev.sweep,
                                    "Also sweep confidence thresholds");
  eval->add_option("--sweep-grid", ev.sweep_grid, "Thresholds (default 0.05..0.95)")
      ->delimiter(',')->needs(sweep_flag);
  eval->add_option("-o,--out", ev.out, "JSON report (default stdout)");
  eval->add_option("--csv", ev.csv, "Per-class CSV");
  eval->add_option("--sweep-csv", ev.sweep_csv, "Sweep curve CSV")->needs(sweep_flag);

  MergeArgs mg;
  auto* merge = app.add_subcommand("merge", "Merge DOTA corpora into a manifest");
  merge->add_option("dirs", mg.dirs, "Corpus label directories")
      ->required()->check(CLI::ExistingDirectory);
  auto* strategy = merge->add_option("--strategy", mg.strategy, "concat or balanced")
      ->envname("OBBEVAL_STRATEGY")
      ->check(CLI::IsMember({"concat", "balanced"}))
      ->capture_default_str();
  merge->add_option("--factors", mg.factors, "Override repetition factors")
      ->delimiter(',')->needs(strategy);
  merge->add_option("--categories", mg.categories, "Category list, one per line")
      ->check(CLI::ExistingFile);
  merge->add_option("-o,--out", mg.out, "Output manifest JSON")->required();

  RenderArgs rd;
  auto* render = app.add_subcommand("render", "Draw detections as SVG overlays");
  render->add_option("detections", rd.detections, "Detections file")
      ->required()->check(CLI::ExistingFile);
  render->add_option("-o,--out", rd.out_dir, "Output directory")->required();
  render->add_option("--image-id", rd.image_ids,
                     "Also render this image when it has no detections");
  add_size_options(render, rd.sizes);

  std::vector<char*> argv;
  std::vector<std::string> storage(args);
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (!mg.factors.empty() && mg.strategy != "balanced") {
      throw CLI::ValidationError("--factors", "only valid with --strategy balanced");
    }
    if (!mg.factors.empty() && mg.factors.size() != mg.dirs.size()) {
      throw CLI::ValidationError("--factors", "needs one factor per corpus");
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*encode) return do_encode(enc, out);
    if (*decode) return do_decode(dec, out);
    if (*eval) return do_eval(ev, out);
    if (*merge) return do_merge(mg, out);
    if (*render) return do_render(rd, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace obbeval::cli
