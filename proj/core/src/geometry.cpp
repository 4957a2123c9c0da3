#include "layoutfuse/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace layoutfuse {

bool is_valid(const BoundingBox& b) {
  for (double c : b.coords()) {
    if (!std::isfinite(c) || c < 0.0 || c > 1.0) return false;
  }
  return b.x1 < b.x2 && b.y1 < b.y2;
}

int clamp_to_unit(BoundingBox& b) {
  int moved = 0;
  for (double* c : {&b.x1, &b.y1, &b.x2, &b.y2}) {
    const double clamped = std::clamp(*c, 0.0, 1.0);
    if (clamped != *c) {
      *c = clamped;
      ++moved;
    }
  }
  return moved;
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

BoundingBox enclosing_hull(const BoundingBox& a, const BoundingBox& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double giou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double hull = enclosing_hull(a, b).area();
  if (hull <= 0.0) return 0.0;
  const double value = inter / uni - (hull - uni) / hull;
  return std::clamp(value, -1.0, 1.0);
}

}  // namespace layoutfuse
