// SPDX-License-Identifier: Apache-2.0
// Test-only oracles and fixture generators. Nothing here calls into the code
// paths it is used to check.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "obbeval/codec.hpp"
#include "obbeval/detection.hpp"
#include "obbeval/geometry.hpp"
#include "obbeval/metrics.hpp"

namespace obbeval::testing {

// ---------------------------------------------------------------------------
// Geometry oracles

inline bool point_in_polygon(const std::vector<Point>& poly, double x, double y) {
  // Even-odd ray casting.
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > y) != (b.y > y)) {
      const double xc = (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x;
      if (x < xc) inside = !inside;
    }
  }
  return inside;
}

struct MonteCarloResult {
  double intersection_area;
  double iou;
};

/// Uniform sampling over the joint bounding box.
inline MonteCarloResult monte_carlo_overlap(const std::vector<Point>& a,
                                            const std::vector<Point>& b,
                                            std::size_t samples,
                                            std::uint64_t seed = 12345) {
  double min_x = a[0].x, max_x = a[0].x, min_y = a[0].y, max_y = a[0].y;
  for (const auto* poly : {&a, &b}) {
    for (const auto& p : *poly) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(min_x, max_x), uy(min_y, max_y);
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = ux(rng), y = uy(rng);
    const bool ia = point_in_polygon(a, x, y);
    const bool ib = point_in_polygon(b, x, y);
    both += ia && ib;
    either += ia || ib;
  }
  const double box_area = (max_x - min_x) * (max_y - min_y);
  return {box_area * static_cast<double>(both) / static_cast<double>(samples),
          either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either)};
}

inline std::vector<Point> as_polygon(const QuadBox& q) {
  return {q.vertices().begin(), q.vertices().end()};
}

/// Convex quad: four points on an ellipse at sorted random angles.
inline std::array<Point, 4> random_convex_quad(std::mt19937_64& rng, Point center,
                                               double rx, double ry) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::array<double, 4> t{};
  for (auto& v : t) v = angle(rng);
  std::sort(t.begin(), t.end());
  // Reject near-coincident angles so the quad has real area.
  for (std::size_t i = 0; i < 4; ++i) {
    const double gap = i + 1 < 4 ? t[i + 1] - t[i] : t[0] + 2 * M_PI - t[3];
    if (gap < 0.15) return random_convex_quad(rng, center, rx, ry);
  }
  const double rot = angle(rng);
  std::array<Point, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double ex = rx * std::cos(t[i]);
    const double ey = ry * std::sin(t[i]);
    out[i] = {center.x + ex * std::cos(rot) - ey * std::sin(rot),
              center.y + ex * std::sin(rot) + ey * std::cos(rot)};
  }
  return out;
}

inline std::array<Point, 4> rotated_rect(Point c, double w, double h, double theta) {
  const double cs = std::cos(theta), sn = std::sin(theta);
  std::array<Point, 4> out{};
  const std::array<std::array<double, 2>, 4> corners = {
      {{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}}};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {c.x + corners[i][0] * cs - corners[i][1] * sn,
              c.y + corners[i][0] * sn + corners[i][1] * cs};
  }
  return out;
}

inline QuadBox make_box(std::initializer_list<Point> pts) {
  std::vector<Point> v(pts);
  return canonicalize(v);
}

inline QuadBox axis_box(double x0, double y0, double x1, double y1) {
  return make_box({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

// ---------------------------------------------------------------------------
// Text oracles

/// Full-matrix edit distance, written independently of the two-row version.
inline std::size_t levenshtein_oracle(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                          std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
    }
  }
  return d[a.size()][b.size()];
}

// ---------------------------------------------------------------------------
// AP oracle

/// Enumerates the PR curve explicitly with integer arithmetic. Labels are
/// in rank order; ignored ones are dropped first.
inline std::optional<double> brute_force_ap(const std::vector<MatchLabel>& ranked,
                                            std::size_t npos, Interpolation interp) {
  std::vector<std::pair<std::size_t, std::size_t>> pts;  // (tp, seen)
  std::size_t tp = 0, seen = 0;
  for (const auto l : ranked) {
    if (l == MatchLabel::kIgnored) continue;
    ++seen;
    tp += l == MatchLabel::kTruePositive;
    pts.emplace_back(tp, seen);
  }
  if (npos == 0) return pts.empty() ? std::nullopt : std::optional<double>(0.0);
  auto max_precision_at = [&](auto reaches) {
    double best = 0.0;
    for (const auto& [t, s] : pts) {
      if (reaches(t)) best = std::max(best, static_cast<double>(t) / static_cast<double>(s));
    }
    return best;
  };
  if (interp == Interpolation::kVoc11) {
    double sum = 0.0;
    for (std::size_t i = 0; i <= 10; ++i) {
      sum += max_precision_at([&](std::size_t t) { return t * 10 >= i * npos; });
    }
    return sum / 11.0;
  }
  // Interpolated precision is constant on each recall step ((j-1)/npos, j/npos].
  double area = 0.0;
  for (std::size_t j = 1; j <= npos; ++j) {
    area += max_precision_at([&](std::size_t t) { return t >= j; }) /
            static_cast<double>(npos);
  }
  return area;
}

// ---------------------------------------------------------------------------
// Matching oracle: DOTA-style greedy matcher written the long way.

inline std::vector<MatchLabel> brute_force_match(const std::vector<QuadBox>& preds,
                                                 const std::vector<QuadBox>& gts,
                                                 const std::vector<bool>& difficult,
                                                 double thr) {
  std::vector<bool> used(gts.size(), false);
  std::vector<MatchLabel> out;
  for (const auto& p : preds) {
    // Monte Carlo-free: rely on IoU of axis boxes computed directly.
    double best = -1.0;
    std::size_t arg = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g]) continue;
      const auto pa = p.vertices();
      const auto ga = gts[g].vertices();
      // Axis-aligned overlap only: callers pass axis-aligned boxes.
      const double px0 = std::min({pa[0].x, pa[1].x, pa[2].x, pa[3].x});
      const double px1 = std::max({pa[0].x, pa[1].x, pa[2].x, pa[3].x});
      const double py0 = std::min({pa[0].y, pa[1].y, pa[2].y, pa[3].y});
      const double py1 = std::max({pa[0].y, pa[1].y, pa[2].y, pa[3].y});
      const double gx0 = std::min({ga[0].x, ga[1].x, ga[2].x, ga[3].x});
      const double gx1 = std::max({ga[0].x, ga[1].x, ga[2].x, ga[3].x});
      const double gy0 = std::min({ga[0].y, ga[1].y, ga[2].y, ga[3].y});
      const double gy1 = std::max({ga[0].y, ga[1].y, ga[2].y, ga[3].y});
      const double iw = std::max(0.0, std::min(px1, gx1) - std::max(px0, gx0));
      const double ih = std::max(0.0, std::min(py1, gy1) - std::max(py0, gy0));
      const double inter = iw * ih;
      const double uni = (px1 - px0) * (py1 - py0) + (gx1 - gx0) * (gy1 - gy0) - inter;
      const double v = uni > 0 ? inter / uni : 0.0;
      if (v > best) {
        best = v;
        arg = g;
      }
    }
    if (arg == gts.size() || best < thr) {
      out.push_back(MatchLabel::kFalsePositive);
    } else if (difficult[arg]) {
      out.push_back(MatchLabel::kIgnored);
    } else {
      used[arg] = true;
      out.push_back(MatchLabel::kTruePositive);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Detection fixtures

/// Knobs for a synthetic detector output on a grid of well separated cells
/// (128 px cells in 1024x1024 images) so every FP has IoU 0 with every GT.
struct DetectorProfile {
  int images = 20;
  int classes = 5;
  int gts_per_image = 40;
  double recall = 0.9;
  int low_fp_per_image = 0;     // FPs with confidence ~ U(0, low_fp_max)
  double low_fp_max = 0.2;
  int hard_fp_per_image = 0;    // FPs with confidence ~ U(0, 1)
  double tp_conf_lo = 0.3;      // TP confidence ~ U(lo, hi)
  double tp_conf_hi = 1.0;
  std::uint64_t seed = 1;
};

struct DetectionFixture {
  std::vector<Detection> preds;
  std::vector<Detection> gts;
};

inline std::string class_name(int c) { return "class" + std::to_string(c); }

inline DetectionFixture make_detector_fixture(const DetectorProfile& profile) {
  DetectionFixture fx;
  std::mt19937_64 rng(profile.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, profile.classes - 1);
  constexpr int kGrid = 8;
  constexpr double kCell = 128.0;
  const int cells_needed = profile.gts_per_image + profile.low_fp_per_image + profile.hard_fp_per_image;
  const int cell_capacity = kGrid * kGrid;
  for (int img = 0; img < profile.images; ++img) {
    const std::string id = "img" + std::to_string(img);
    std::vector<int> cells(cell_capacity * ((cells_needed + cell_capacity - 1) / cell_capacity));
    // Several layers when a single grid is not enough; layers are offset
    // images so boxes in different layers never overlap.
    std::iota(cells.begin(), cells.end(), 0);
    std::shuffle(cells.begin(), cells.end(), rng);
    int next_cell = 0;
    auto cell_box = [&](int cell, double jitter_x, double jitter_y, double w, double h,
                        double theta) {
      const int layer = cell / cell_capacity;
      const int local = cell % cell_capacity;
      const Point c{(local % kGrid + 0.5) * kCell + jitter_x,
                    (local / kGrid + 0.5) * kCell + jitter_y + layer * 1024.0};
      const auto r = rotated_rect(c, w, h, theta);
      return canonicalize(std::span<const Point>(r));
    };
    for (int g = 0; g < profile.gts_per_image; ++g) {
      const int cell = cells[next_cell++];
      const double w = 50 + 30 * unit(rng), h = 30 + 20 * unit(rng), th = unit(rng) * M_PI;
      Detection gt;
      gt.image_id = id;
      gt.category = class_name(cls(rng));
      gt.box = cell_box(cell, 0, 0, w, h, th);
      fx.gts.push_back(gt);
      if (unit(rng) < profile.recall) {
        Detection p = gt;
        p.difficult = false;
        p.box = cell_box(cell, 2 * unit(rng) - 1, 2 * unit(rng) - 1, w, h, th + 0.02);
        p.confidence = profile.tp_conf_lo + (profile.tp_conf_hi - profile.tp_conf_lo) * unit(rng);
        fx.preds.push_back(p);
      }
    }
    auto add_fp = [&](double conf) {
      const int cell = cells[next_cell++];
      Detection p;
      p.image_id = id;
      p.category = class_name(cls(rng));
      p.box = cell_box(cell, 0, 0, 40 + 20 * unit(rng), 30, unit(rng) * M_PI);
      p.confidence = conf;
      fx.preds.push_back(p);
    };
    for (int f = 0; f < profile.low_fp_per_image; ++f) add_fp(profile.low_fp_max * unit(rng));
    for (int f = 0; f < profile.hard_fp_per_image; ++f) add_fp(unit(rng));
  }
  return fx;
}

}  // namespace obbeval::testing
