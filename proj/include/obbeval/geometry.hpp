// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

namespace obbeval {

// Image coordinates: x grows right, y grows down. "Clockwise" is clockwise
// as drawn on screen, which is a positive raw shoelace sum in this frame.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Oriented quadrilateral in canonical form: clockwise winding, vertex 0 is
/// the vertex with the smallest y (ties: smallest x).
///
/// The only way to obtain a QuadBox is through canonicalize(), so every
/// instance satisfies the invariant.
class QuadBox {
 public:
  QuadBox() = default;

  const std::array<Point, 4>& vertices() const noexcept { return vertices_; }
  const Point& operator[](std::size_t i) const noexcept { return vertices_[i]; }

  /// Flat (x1, y1, ..., x4, y4).
  std::array<double, 8> coords() const noexcept;

  friend bool operator==(const QuadBox&, const QuadBox&) = default;

 private:
  explicit QuadBox(const std::array<Point, 4>& v) : vertices_(v) {}
  friend QuadBox canonicalize(std::span<const Point> vertices);
  friend QuadBox detail_adopt_canonical(const std::array<Point, 4>& v);

  std::array<Point, 4> vertices_{};
};

/// Wraps vertices that are already canonical under an order-preserving map
/// (the codec dequantizes canonical bins). Not part of the public surface.
QuadBox detail_adopt_canonical(const std::array<Point, 4>& v);

using ConvexPolygon = std::vector<Point>;

/// Reorders four points into canonical form. Self-intersecting input is
/// re-sorted by angle around the vertex centroid first. Throws
/// Error(kInvalidGeometry) on non-finite input or a vertex count other than 4.
QuadBox canonicalize(std::span<const Point> vertices);
QuadBox canonicalize(const std::array<double, 8>& coords);

/// Signed shoelace area; positive for clockwise (screen) winding.
double signed_area(std::span<const Point> polygon) noexcept;

/// Non-negative polygon area. Returns 0 for fewer than 3 vertices.
double shoelace_area(std::span<const Point> polygon) noexcept;
double shoelace_area(const QuadBox& box) noexcept;

bool is_convex(std::span<const Point> polygon) noexcept;
bool is_degenerate(const QuadBox& box) noexcept;

/// Intersection of two convex boxes by successive half-plane clipping.
/// Returns an empty polygon when the boxes are disjoint, touch only along an
/// edge or a point, or either box is degenerate. Throws
/// Error(kInvalidGeometry) if either box is non-convex.
ConvexPolygon convex_intersection(const QuadBox& a, const QuadBox& b);

/// Intersection over union in [0, 1]. Total: degenerate boxes give 0 and
/// concave boxes are handled exactly by triangulation.
double iou(const QuadBox& a, const QuadBox& b) noexcept;

}  // namespace obbeval
