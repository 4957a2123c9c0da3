#pragma once

#include <array>

namespace layoutfuse {

/// Axis-aligned rectangle in normalized page coordinates.
/// x grows to the right, y grows downward; a valid box has x1 < x2 and y1 < y2
/// with every coordinate in [0, 1].
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  [[nodiscard]] double width() const { return x2 - x1; }
  [[nodiscard]] double height() const { return y2 - y1; }
  [[nodiscard]] double area() const { return width() * height(); }
  [[nodiscard]] std::array<double, 4> coords() const { return {x1, y1, x2, y2}; }
  static BoundingBox from_coords(const std::array<double, 4>& c) { return {c[0], c[1], c[2], c[3]}; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

[[nodiscard]] bool is_valid(const BoundingBox& box);

/// Clamps every coordinate into [0, 1]; returns how many coordinates moved.
int clamp_to_unit(BoundingBox& box);

[[nodiscard]] double intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Smallest box enclosing both inputs.
[[nodiscard]] BoundingBox enclosing_hull(const BoundingBox& a, const BoundingBox& b);

/// Intersection over union, in [0, 1].
[[nodiscard]] double iou(const BoundingBox& a, const BoundingBox& b);

/// Generalized IoU: iou - (hull - union) / hull, in [-1, 1].
[[nodiscard]] double giou(const BoundingBox& a, const BoundingBox& b);

}  // namespace layoutfuse
