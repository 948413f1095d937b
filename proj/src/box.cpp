#include "oneclick/box.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oneclick/types.hpp"

namespace oneclick {

Box::Box(double cx_, double cy_, double w_, double h_) : cx(cx_), cy(cy_), w(w_), h(h_) {
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(w) || !std::isfinite(h)) {
    throw std::invalid_argument("box: non-finite coordinate");
  }
  if (!(w > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("box: width and height must be positive");
  }
}

Box Box::from_corners(const Corners& c) { return from_corners(c.x1, c.y1, c.x2, c.y2); }

Box Box::from_corners(double x1, double y1, double x2, double y2) {
  return Box((x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1);
}

Corners Box::corners() const noexcept {
  return {cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
}

bool Box::strictly_contains(double x, double y) const noexcept {
  const Corners c = corners();
  return x > c.x1 && x < c.x2 && y > c.y1 && y < c.y2;
}

bool Box::contains(double x, double y) const noexcept {
  const Corners c = corners();
  return x >= c.x1 && x <= c.x2 && y >= c.y1 && y <= c.y2;
}

bool Box::contains(const Box& other, double tol) const noexcept {
  const Corners a = corners();
  const Corners b = other.corners();
  return b.x1 >= a.x1 - tol && b.y1 >= a.y1 - tol && b.x2 <= a.x2 + tol && b.y2 <= a.y2 + tol;
}

double box_iou(const Box& a, const Box& b) noexcept {
  const Corners p = a.corners();
  const Corners q = b.corners();
  const double iw = std::min(p.x2, q.x2) - std::max(p.x1, q.x1);
  const double ih = std::min(p.y2, q.y2) - std::max(p.y1, q.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool intersect(const Box& a, const Box& b, Box* out) {
  const Corners p = a.corners();
  const Corners q = b.corners();
  const double x1 = std::max(p.x1, q.x1);
  const double y1 = std::max(p.y1, q.y1);
  const double x2 = std::min(p.x2, q.x2);
  const double y2 = std::min(p.y2, q.y2);
  if (x2 <= x1 || y2 <= y1) return false;
  if (out) *out = Box::from_corners(x1, y1, x2, y2);
  return true;
}

namespace {

// Resolves one axis: translate inward, then shrink if still too large.
void clamp_axis(double& center, double& extent, double limit) {
  if (extent >= limit) {
    extent = limit;
    center = limit / 2.0;
    return;
  }
  const double half = extent / 2.0;
  if (center - half < 0.0) center = half;
  if (center + half > limit) center = limit - half;
}

}  // namespace

Box clamp_box_to_frame(const Box& b, double width, double height) {
  double cx = b.cx;
  double cy = b.cy;
  double w = b.w;
  double h = b.h;
  clamp_axis(cx, w, width);
  clamp_axis(cy, h, height);
  return Box(cx, cy, w, h);
}

Box clamp_box_to_image(const Box& b, const ImageRef& img) {
  return clamp_box_to_frame(b, img.width, img.height);
}

Box to_region_local(const Box& b, const Box& region) {
  const Corners r = region.corners();
  return Box(b.cx - r.x1, b.cy - r.y1, b.w, b.h);
}

Box to_image_coords(const Box& local, const Box& region) {
  const Corners r = region.corners();
  return Box(local.cx + r.x1, local.cy + r.y1, local.w, local.h);
}

bool almost_equal(const Box& a, const Box& b, double tol) noexcept {
  return std::abs(a.cx - b.cx) <= tol && std::abs(a.cy - b.cy) <= tol &&
         std::abs(a.w - b.w) <= tol && std::abs(a.h - b.h) <= tol;
}

}  // namespace oneclick
