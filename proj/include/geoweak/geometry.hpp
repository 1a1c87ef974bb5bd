#pragma once

#include <algorithm>
#include <cmath>

#include "geoweak/datamodel.hpp"
#include "geoweak/errors.hpp"

namespace geoweak {

// Intersection-over-union of two axis-aligned boxes. Exactly 0 for disjoint
// or edge-touching boxes; symmetric by construction.
inline double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

inline PixelPoint box_center(const BBox& b) {
  return {(b.xmin + b.xmax) / 2.0, (b.ymin + b.ymax) / 2.0};
}

// Boundary-inclusive containment.
inline bool contains(const BBox& b, const PixelPoint& p) {
  return b.xmin <= p.x && p.x <= b.xmax && b.ymin <= p.y && p.y <= b.ymax;
}

// Minimum bounding rectangle over the four corners. Throws when the corners
// are all collinear (zero enclosing area).
inline BBox mbr(const OrientedBox& o) {
  double xmin = o.corners[0].x, xmax = o.corners[0].x;
  double ymin = o.corners[0].y, ymax = o.corners[0].y;
  for (const auto& c : o.corners) {
    if (!c.finite()) {
      throw validation_error("oriented box has non-finite corner");
    }
    xmin = std::min(xmin, c.x);
    xmax = std::max(xmax, c.x);
    ymin = std::min(ymin, c.y);
    ymax = std::max(ymax, c.y);
  }

  const double spread = std::max(xmax - xmin, ymax - ymin);
  bool collinear = true;
  if (spread > 0.0) {
    // Base vector from corner 0 to the farthest corner; the set is collinear
    // iff every cross product against it vanishes (relative tolerance).
    std::size_t far = 0;
    double best = -1.0;
    for (std::size_t i = 1; i < 4; ++i) {
      const double dx = o.corners[i].x - o.corners[0].x;
      const double dy = o.corners[i].y - o.corners[0].y;
      const double d2 = dx * dx + dy * dy;
      if (d2 > best) {
        best = d2;
        far = i;
      }
    }
    const double vx = o.corners[far].x - o.corners[0].x;
    const double vy = o.corners[far].y - o.corners[0].y;
    const double tol = 1e-9 * spread * spread;
    for (std::size_t i = 1; i < 4; ++i) {
      const double wx = o.corners[i].x - o.corners[0].x;
      const double wy = o.corners[i].y - o.corners[0].y;
      if (std::abs(vx * wy - vy * wx) > tol) {
        collinear = false;
        break;
      }
    }
  }
  if (collinear) {
    throw validation_error("oriented box corners are collinear");
  }
  return {xmin, ymin, xmax, ymax};
}

}  // namespace geoweak
