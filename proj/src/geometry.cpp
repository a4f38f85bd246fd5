// SPDX-License-Identifier: Apache-2.0
#include "obbeval/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "obbeval/error.hpp"

namespace obbeval {
namespace {

constexpr double kRelativeAreaEps = 1e-12;
constexpr double kDedupEps = 1e-9;

double orient(const Point& a, const Point& b, const Point& c) noexcept {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// Squared extent of the bounding box, used to turn area tolerances into
// scale-relative ones.
double extent_sq(std::span<const Point> pts) noexcept {
  if (pts.empty()) return 0.0;
  double min_x = pts[0].x, max_x = pts[0].x;
  double min_y = pts[0].y, max_y = pts[0].y;
  for (const auto& p : pts) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span = std::max(max_x - min_x, max_y - min_y);
  return span * span;
}

int sign_eps(double v, double eps) noexcept { return (v > eps) - (v < -eps); }

bool properly_cross(const Point& a, const Point& b, const Point& c,
                    const Point& d, double eps) noexcept {
  const int o1 = sign_eps(orient(a, b, c), eps);
  const int o2 = sign_eps(orient(a, b, d), eps);
  const int o3 = sign_eps(orient(c, d, a), eps);
  const int o4 = sign_eps(orient(c, d, b), eps);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

bool self_intersecting(const std::array<Point, 4>& p, double eps) noexcept {
  return properly_cross(p[0], p[1], p[2], p[3], eps) ||
         properly_cross(p[1], p[2], p[3], p[0], eps);
}

void sort_by_angle(std::array<Point, 4>& p) {
  Point c;
  for (const auto& v : p) {
    c.x += v.x / 4.0;
    c.y += v.y / 4.0;
  }
  // Increasing atan2 in a y-down frame walks clockwise on screen.
  std::sort(p.begin(), p.end(), [&c](const Point& a, const Point& b) {
    const double ta = std::atan2(a.y - c.y, a.x - c.x);
    const double tb = std::atan2(b.y - c.y, b.x - c.x);
    if (ta != tb) return ta < tb;
    const double da = std::hypot(a.x - c.x, a.y - c.y);
    const double db = std::hypot(b.x - c.x, b.y - c.y);
    if (da != db) return da < db;
    return std::tie(a.y, a.x) < std::tie(b.y, b.x);
  });
}

// Among rotations starting at a min-(y, x) vertex, take the lexicographically
// smallest coordinate sequence; only matters for repeated vertices.
std::array<Point, 4> rotate_to_start(const std::array<Point, 4>& p) {
  auto key = [](const Point& v) { return std::tie(v.y, v.x); };
  const Point* best_vertex = &p[0];
  for (const auto& v : p) {
    if (key(v) < key(*best_vertex)) best_vertex = &v;
  }
  std::array<Point, 4> best{};
  bool have = false;
  for (std::size_t s = 0; s < 4; ++s) {
    if (!(p[s] == *best_vertex)) continue;
    std::array<Point, 4> cand{};
    for (std::size_t i = 0; i < 4; ++i) cand[i] = p[(s + i) % 4];
    const bool smaller = std::lexicographical_compare(
        cand.begin(), cand.end(), best.begin(), best.end(),
        [&key](const Point& a, const Point& b) { return key(a) < key(b); });
    if (!have || smaller) {
      best = cand;
      have = true;
    }
  }
  return best;
}

// Sutherland-Hodgman clip of `subject` by the convex, positively wound
// `clip`. Both inputs are assumed non-degenerate.
std::vector<Point> clip_convex(std::span<const Point> subject,
                               std::span<const Point> clip) {
  std::vector<Point> poly(subject.begin(), subject.end());
  std::vector<Point> next;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !poly.empty(); ++e) {
    const Point& e0 = clip[e];
    const Point& e1 = clip[(e + 1) % m];
    next.clear();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& cur = poly[i];
      const Point& prev = poly[(i + n - 1) % n];
      const double dc = orient(e0, e1, cur);
      const double dp = orient(e0, e1, prev);
      if (dc >= 0.0) {
        if (dp < 0.0) {
          const double t = dp / (dp - dc);
          next.push_back({prev.x + (cur.x - prev.x) * t,
                          prev.y + (cur.y - prev.y) * t});
        }
        next.push_back(cur);
      } else if (dp >= 0.0) {
        const double t = dp / (dp - dc);
        next.push_back(
            {prev.x + (cur.x - prev.x) * t, prev.y + (cur.y - prev.y) * t});
      }
    }
    poly.swap(next);
  }

  std::vector<Point> out;
  out.reserve(poly.size());
  auto close = [](const Point& a, const Point& b) {
    return std::abs(a.x - b.x) <= kDedupEps && std::abs(a.y - b.y) <= kDedupEps;
  };
  for (const auto& p : poly) {
    if (out.empty() || !close(out.back(), p)) out.push_back(p);
  }
  while (out.size() > 1 && close(out.front(), out.back())) out.pop_back();
  if (out.size() < 3) return {};
  return out;
}

// Convex pieces covering a canonical quad: the quad itself if convex,
// otherwise two triangles split along the diagonal at the reflex vertex.
std::vector<std::vector<Point>> convex_pieces(const QuadBox& q) {
  const auto& p = q.vertices();
  if (is_convex(p)) return {std::vector<Point>(p.begin(), p.end())};
  std::size_t reflex = 0;
  double most_negative = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double turn = orient(p[(i + 3) % 4], p[i], p[(i + 1) % 4]);
    if (turn < most_negative) {
      most_negative = turn;
      reflex = i;
    }
  }
  const Point& a = p[reflex];
  const Point& b = p[(reflex + 1) % 4];
  const Point& c = p[(reflex + 2) % 4];
  const Point& d = p[(reflex + 3) % 4];
  std::vector<std::vector<Point>> pieces;
  for (std::vector<Point> tri : {std::vector<Point>{a, b, c},
                                 std::vector<Point>{c, d, a}}) {
    if (signed_area(tri) < 0.0) std::reverse(tri.begin(), tri.end());
    pieces.push_back(std::move(tri));
  }
  return pieces;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidGeometry: return "invalid-geometry";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kMalformedLine: return "malformed-line";
    case ErrorKind::kUnknownCategory: return "unknown-category";
    case ErrorKind::kDuplicateId: return "duplicate-id";
  }
  return "unknown";
}

std::array<double, 8> QuadBox::coords() const noexcept {
  std::array<double, 8> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[2 * i] = vertices_[i].x;
    out[2 * i + 1] = vertices_[i].y;
  }
  return out;
}

QuadBox detail_adopt_canonical(const std::array<Point, 4>& v) {
  return QuadBox(v);
}

QuadBox canonicalize(std::span<const Point> vertices) {
  if (vertices.size() != 4) {
    throw Error(ErrorKind::kInvalidGeometry,
                "quadrilateral needs exactly 4 vertices, got " +
                    std::to_string(vertices.size()));
  }
  std::array<Point, 4> p{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!std::isfinite(vertices[i].x) || !std::isfinite(vertices[i].y)) {
      throw Error(ErrorKind::kInvalidGeometry, "non-finite vertex coordinate");
    }
    p[i] = vertices[i];
  }
  const double eps = kRelativeAreaEps * extent_sq(p);
  if (self_intersecting(p, eps)) sort_by_angle(p);
  if (signed_area(p) < -eps) std::swap(p[1], p[3]);
  return QuadBox(rotate_to_start(p));
}

QuadBox canonicalize(const std::array<double, 8>& coords) {
  std::array<Point, 4> p{};
  for (std::size_t i = 0; i < 4; ++i) p[i] = {coords[2 * i], coords[2 * i + 1]};
  return canonicalize(std::span<const Point>(p));
}

double signed_area(std::span<const Point> polygon) noexcept {
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  const Point& o = polygon[0];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    twice += orient(o, polygon[i], polygon[i + 1]);
  }
  return 0.5 * twice;
}

double shoelace_area(std::span<const Point> polygon) noexcept {
  return std::abs(signed_area(polygon));
}

double shoelace_area(const QuadBox& box) noexcept {
  return shoelace_area(box.vertices());
}

bool is_convex(std::span<const Point> polygon) noexcept {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  const double eps = kRelativeAreaEps * extent_sq(polygon);
  bool pos = false;
  bool neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    const int s = sign_eps(
        orient(polygon[i], polygon[(i + 1) % n], polygon[(i + 2) % n]), eps);
    pos = pos || s > 0;
    neg = neg || s < 0;
  }
  return !(pos && neg);
}

bool is_degenerate(const QuadBox& box) noexcept {
  const auto& v = box.vertices();
  return std::abs(signed_area(v)) <= kRelativeAreaEps * extent_sq(v);
}

ConvexPolygon convex_intersection(const QuadBox& a, const QuadBox& b) {
  if (!is_convex(a.vertices()) || !is_convex(b.vertices())) {
    throw Error(ErrorKind::kInvalidGeometry,
                "convex_intersection requires convex quadrilaterals");
  }
  if (is_degenerate(a) || is_degenerate(b)) return {};
  return clip_convex(a.vertices(), b.vertices());
}

double iou(const QuadBox& a, const QuadBox& b) noexcept {
  if (is_degenerate(a) || is_degenerate(b)) return 0.0;
  const double area_a = shoelace_area(a);
  const double area_b = shoelace_area(b);
  double inter = 0.0;
  for (const auto& pa : convex_pieces(a)) {
    for (const auto& pb : convex_pieces(b)) {
      inter += shoelace_area(clip_convex(pa, pb));
    }
  }
  const double uni = area_a + area_b - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace obbeval
