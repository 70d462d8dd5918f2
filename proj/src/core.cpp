#include "latrack/core.hpp"

#include <algorithm>

namespace latrack {

BoundingBox corner_to_state(double x, double y, double w, double h) {
  if (!(w > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("invalid box: width and height must be positive");
  }
  return BoundingBox{x + w / 2.0, y + h / 2.0, h, w / h};
}

CornerBox state_to_corner(const BoundingBox& box) {
  if (!box.valid()) {
    throw std::invalid_argument("invalid box: height and aspect ratio must be positive");
  }
  const double w = box.width();
  return CornerBox{box.u - w / 2.0, box.v - box.h / 2.0, w, box.h};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const CornerBox ca = state_to_corner(a);
  const CornerBox cb = state_to_corner(b);

  const double ix = std::min(ca.x + ca.w, cb.x + cb.w) - std::max(ca.x, cb.x);
  const double iy = std::min(ca.y + ca.h, cb.y + cb.h) - std::max(ca.y, cb.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;

  const double inter = ix * iy;
  const double uni = ca.w * ca.h + cb.w * cb.h - inter;
  return inter / uni;
}

}  // namespace latrack
