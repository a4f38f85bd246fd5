// SPDX-License-Identifier: Apache-2.0
#include "obbeval/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>
#include <tuple>

#include "obbeval/error.hpp"
#include "obbeval/geometry.hpp"

namespace obbeval {
namespace {

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n). Each index writes only its own output slot, so
// the result is independent of the schedule.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

// Tie-break order shared by every run: category, image, then raster order of
// the starting vertex and the remaining coordinates.
bool canonical_less(const Detection& a, const Detection& b) {
  const auto ca = a.box.coords();
  const auto cb = b.box.coords();
  return std::tie(a.category, a.image_id, ca[1], ca[0], ca) <
         std::tie(b.category, b.image_id, cb[1], cb[0], cb);
}

// One (class, image) pair with its IoU matrix precomputed.
struct Cell {
  std::vector<std::size_t> preds;  // canonical ranks, ascending
  std::vector<bool> difficult;     // per GT
  std::vector<double> ious;        // preds.size() x difficult.size()
};

struct ClassData {
  std::string name;
  std::vector<Cell> cells;
  std::size_t n_positives = 0;
};

struct LabeledPred {
  double score;
  std::size_t rank;
  MatchLabel label;
};

bool score_order(double sa, std::size_t ra, double sb, std::size_t rb) {
  if (sa != sb) return sa > sb;
  return ra < rb;
}

// Greedy matching of one cell; `order` holds row indices into cell.preds in
// evaluation order.
std::vector<bool> match_cell(const Cell& cell,
                             std::span<const std::size_t> order,
                             double iou_threshold,
                             std::vector<MatchLabel>& labels) {
  const std::size_t n_gt = cell.difficult.size();
  std::vector<bool> taken(n_gt, false);
  labels.assign(order.size(), MatchLabel::kFalsePositive);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double* row = cell.ious.data() + order[k] * n_gt;
    std::size_t best = n_gt;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (taken[g]) continue;
      if (row[g] > best_iou) {
        best_iou = row[g];
        best = g;
      }
    }
    if (best == n_gt || best_iou < iou_threshold) continue;
    if (cell.difficult[best]) {
      labels[k] = MatchLabel::kIgnored;
    } else {
      labels[k] = MatchLabel::kTruePositive;
      taken[best] = true;
    }
  }
  return taken;
}

class Evaluator {
 public:
  Evaluator(const std::vector<Detection>& preds,
            const std::vector<Detection>& gts, double iou_threshold,
            unsigned threads)
      : iou_threshold_(iou_threshold), threads_(threads) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return canonical_less(preds[a], preds[b]);
                     });
    ranked_.reserve(preds.size());
    for (const std::size_t i : order) ranked_.push_back(&preds[i]);

    std::vector<std::string> names;
    for (const auto& d : preds) names.push_back(d.category);
    for (const auto& d : gts) names.push_back(d.category);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    classes_.resize(names.size());

    // Group by (class, image). Predictions are visited in rank order so each
    // cell's rank list is ascending.
    std::vector<std::map<std::string, std::size_t>> cell_index(names.size());
    std::vector<std::vector<std::vector<const Detection*>>> cell_gts(names.size());
    auto class_of = [&names](const std::string& c) {
      return static_cast<std::size_t>(
          std::lower_bound(names.begin(), names.end(), c) - names.begin());
    };
    auto cell_of = [&](std::size_t c, const std::string& image) -> std::size_t {
      auto [it, inserted] = cell_index[c].try_emplace(image, classes_[c].cells.size());
      if (inserted) {
        classes_[c].cells.emplace_back();
        cell_gts[c].emplace_back();
      }
      return it->second;
    };
    for (std::size_t c = 0; c < names.size(); ++c) classes_[c].name = names[c];
    for (std::size_t r = 0; r < ranked_.size(); ++r) {
      const std::size_t c = class_of(ranked_[r]->category);
      classes_[c].cells[cell_of(c, ranked_[r]->image_id)].preds.push_back(r);
    }
    for (const auto& g : gts) {
      const std::size_t c = class_of(g.category);
      const std::size_t cell = cell_of(c, g.image_id);
      cell_gts[c][cell].push_back(&g);
      classes_[c].cells[cell].difficult.push_back(g.difficult);
      if (!g.difficult) ++classes_[c].n_positives;
    }

    parallel_for(classes_.size(), threads_, [&](std::size_t c) {
      for (std::size_t k = 0; k < classes_[c].cells.size(); ++k) {
        Cell& cell = classes_[c].cells[k];
        const auto& cgts = cell_gts[c][k];
        cell.ious.resize(cell.preds.size() * cgts.size());
        for (std::size_t p = 0; p < cell.preds.size(); ++p) {
          for (std::size_t g = 0; g < cgts.size(); ++g) {
            cell.ious[p * cgts.size() + g] =
                iou(ranked_[cell.preds[p]]->box, cgts[g]->box);
          }
        }
      }
    });
  }

  std::size_t num_preds() const noexcept { return ranked_.size(); }
  std::size_t num_classes() const noexcept { return classes_.size(); }
  const std::string& class_name(std::size_t c) const { return classes_[c].name; }
  const Detection& ranked(std::size_t r) const { return *ranked_[r]; }

  // Labels of every active prediction of class c, sorted by (score desc,
  // rank asc). `scores` and `active` are indexed by canonical rank.
  std::vector<LabeledPred> label_class(std::size_t c,
                                       std::span<const double> scores,
                                       std::span<const char> active) const {
    std::vector<LabeledPred> out;
    std::vector<std::size_t> order;
    std::vector<MatchLabel> labels;
    for (const Cell& cell : classes_[c].cells) {
      order.clear();
      for (std::size_t p = 0; p < cell.preds.size(); ++p) {
        if (active.empty() || active[cell.preds[p]]) order.push_back(p);
      }
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const std::size_t ra = cell.preds[a];
        const std::size_t rb = cell.preds[b];
        return score_order(scores[ra], ra, scores[rb], rb);
      });
      match_cell(cell, order, iou_threshold_, labels);
      for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t r = cell.preds[order[k]];
        out.push_back({scores[r], r, labels[k]});
      }
    }
    std::sort(out.begin(), out.end(), [](const LabeledPred& a, const LabeledPred& b) {
      return score_order(a.score, a.rank, b.score, b.rank);
    });
    return out;
  }

  std::optional<double> class_ap(std::size_t c, std::span<const double> scores,
                                 std::span<const char> active,
                                 Interpolation interp) const {
    const auto labeled = label_class(c, scores, active);
    std::vector<MatchLabel> labels;
    labels.reserve(labeled.size());
    for (const auto& l : labeled) labels.push_back(l.label);
    return average_precision(labels, classes_[c].n_positives, interp);
  }

  // Per-class AP for several score vectors at once; result[s][c].
  std::vector<std::vector<std::optional<double>>> ap_table(
      const std::vector<std::vector<double>>& score_sets,
      std::span<const char> active, Interpolation interp) const {
    const std::size_t n_classes = classes_.size();
    std::vector<std::vector<std::optional<double>>> table(
        score_sets.size(), std::vector<std::optional<double>>(n_classes));
    parallel_for(score_sets.size() * n_classes, threads_, [&](std::size_t job) {
      const std::size_t s = job / n_classes;
      const std::size_t c = job % n_classes;
      table[s][c] = class_ap(c, score_sets[s], active, interp);
    });
    return table;
  }

  std::vector<ClassCounts> counts(std::span<const double> scores,
                                  std::span<const char> active) const {
    std::vector<ClassCounts> out(classes_.size());
    parallel_for(classes_.size(), threads_, [&](std::size_t c) {
      ClassCounts cc;
      for (const auto& l : label_class(c, scores, active)) {
        if (l.label == MatchLabel::kTruePositive) ++cc.tp;
        if (l.label == MatchLabel::kFalsePositive) ++cc.fp;
      }
      cc.fn = classes_[c].n_positives - cc.tp;
      out[c] = cc;
    });
    return out;
  }

  std::vector<double> confidence_scores() const {
    std::vector<double> s(ranked_.size());
    for (std::size_t r = 0; r < ranked_.size(); ++r) {
      s[r] = ranked_[r]->confidence.value_or(1.0);
    }
    return s;
  }

 private:
  double iou_threshold_;
  unsigned threads_;
  std::vector<const Detection*> ranked_;
  std::vector<ClassData> classes_;
};

double mean_of_present(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

MapNcResult map_nc_impl(const Evaluator& ev, const EvalConfig& config,
                        std::span<const char> active) {
  const std::size_t n = ev.num_preds();
  std::vector<std::vector<double>> score_sets;
  for (int run = 0; run < config.n_random_runs; ++run) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(run);
    std::vector<double> s(n);
    for (std::size_t r = 0; r < n; ++r) s[r] = random_confidence(seed, r);
    score_sets.push_back(std::move(s));
  }
  score_sets.emplace_back(n, config.constant_value);

  const auto table = ev.ap_table(score_sets, active, config.interpolation);

  MapNcResult result;
  for (std::size_t s = 0; s < table.size(); ++s) {
    RunValue rv;
    if (s + 1 < table.size()) {
      rv.kind = RunKind::kRandom;
      rv.seed = config.base_seed + s;
    } else {
      rv.kind = RunKind::kConstant;
    }
    rv.value = mean_of_present(table[s]);
    result.runs.push_back(rv);
  }
  double sum = 0.0;
  for (const auto& r : result.runs) sum += r.value;
  result.mean = sum / static_cast<double>(result.runs.size());
  double sq = 0.0;
  for (const auto& r : result.runs) sq += (r.value - result.mean) * (r.value - result.mean);
  result.stddev = std::sqrt(sq / static_cast<double>(result.runs.size()));

  for (std::size_t c = 0; c < ev.num_classes(); ++c) {
    if (!table[0][c]) continue;
    double class_sum = 0.0;
    for (const auto& row : table) class_sum += row[c].value_or(0.0);
    result.per_class_ap[ev.class_name(c)] = class_sum / static_cast<double>(table.size());
  }
  return result;
}

F1Result f1_impl(const Evaluator& ev, std::span<const char> active) {
  const auto scores = ev.confidence_scores();
  const auto counts = ev.counts(scores, active);
  F1Result result;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const auto& cc = counts[c];
    // Classes with neither positives nor active predictions stay out.
    if (cc.tp + cc.fp + cc.fn == 0) continue;
    const double f1 = f1_from_counts(cc);
    result.per_class_f1[ev.class_name(c)] = f1;
    result.counts[ev.class_name(c)] = cc;
    sum += f1;
    ++n;
  }
  result.mf1 = n == 0 ? 0.0 : sum / static_cast<double>(n);
  return result;
}

}  // namespace

std::string_view to_string(RunKind kind) {
  return kind == RunKind::kRandom ? "random" : "constant";
}

ClassMatch match_class(std::span<const Detection> preds,
                       std::span<const Detection> gts, double iou_threshold) {
  Cell cell;
  cell.preds.resize(preds.size());
  std::iota(cell.preds.begin(), cell.preds.end(), std::size_t{0});
  for (const auto& g : gts) cell.difficult.push_back(g.difficult);
  cell.ious.resize(preds.size() * gts.size());
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      cell.ious[p * gts.size() + g] = iou(preds[p].box, gts[g].box);
    }
  }
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ClassMatch out;
  out.gt_matched = match_cell(cell, order, iou_threshold, out.labels);
  return out;
}

F1Result f1_scores(const std::vector<Detection>& preds,
                   const std::vector<Detection>& gts, double iou_threshold,
                   unsigned threads) {
  const Evaluator ev(preds, gts, iou_threshold, threads);
  return f1_impl(ev, {});
}

MapNcResult map_nc(const std::vector<Detection>& preds,
                   const std::vector<Detection>& gts, const EvalConfig& config) {
  config.validate();
  const Evaluator ev(preds, gts, config.iou_threshold, config.threads);
  return map_nc_impl(ev, config, {});
}

MetricsReport evaluate(const std::vector<Detection>& preds,
                       const std::vector<Detection>& gts,
                       const EvalConfig& config) {
  config.validate();
  const Evaluator ev(preds, gts, config.iou_threshold, config.threads);
  MetricsReport report;
  auto nc = map_nc_impl(ev, config, {});
  report.per_class_ap = std::move(nc.per_class_ap);
  report.map_nc_mean = nc.mean;
  report.map_nc_std = nc.stddev;
  report.map_nc_runs = std::move(nc.runs);
  auto f1 = f1_impl(ev, {});
  report.per_class_f1 = std::move(f1.per_class_f1);
  report.counts = std::move(f1.counts);
  report.mf1 = f1.mf1;
  return report;
}

SweepResult sweep_thresholds(const std::vector<Detection>& preds,
                             const std::vector<Detection>& gts,
                             const EvalConfig& config) {
  config.validate();
  for (const auto& p : preds) {
    if (!p.confidence) {
      throw Error(ErrorKind::kInvalidArgument,
                  "threshold sweep needs a confidence on every prediction "
                  "(image '" + p.image_id + "')");
    }
  }
  const Evaluator ev(preds, gts, config.iou_threshold, config.threads);
  const auto scores = ev.confidence_scores();

  SweepResult result;
  std::vector<char> active(ev.num_preds());
  for (const double t : config.sweep_grid) {
    for (std::size_t r = 0; r < active.size(); ++r) active[r] = scores[r] >= t;
    const auto nc = map_nc_impl(ev, config, active);
    const auto f1 = f1_impl(ev, active);
    const auto with_conf = ev.ap_table({scores}, active, config.interpolation);

    SweepPoint pt;
    pt.threshold = t;
    pt.map_nc_mean = nc.mean;
    pt.map_nc_std = nc.stddev;
    pt.mf1 = f1.mf1;
    pt.map_with_confidence = mean_of_present(with_conf[0]);
    result.points.push_back(pt);
  }
  if (!result.points.empty()) {
    result.best_map_nc = {result.points[0].threshold, result.points[0].map_nc_mean};
    result.best_mf1 = {result.points[0].threshold, result.points[0].mf1};
    for (const auto& pt : result.points) {
      if (pt.map_nc_mean > result.best_map_nc.value) {
        result.best_map_nc = {pt.threshold, pt.map_nc_mean};
      }
      if (pt.mf1 > result.best_mf1.value) result.best_mf1 = {pt.threshold, pt.mf1};
    }
  }
  return result;
}

}  // namespace obbeval
