#pragma once

#include <compare>

namespace oneclick {

struct ImageRef;

/// Axis-aligned corner form. Origin top-left, x right, y down.
struct Corners {
  double x1;
  double y1;
  double x2;
  double y2;
};

/// Center-form box in continuous pixel coordinates. Width and height are
/// strictly positive; the constructor rejects anything else.
struct Box {
  double cx;
  double cy;
  double w;
  double h;

  Box(double cx, double cy, double w, double h);

  static Box from_corners(const Corners& c);
  static Box from_corners(double x1, double y1, double x2, double y2);

  Corners corners() const noexcept;
  double area() const noexcept { return w * h; }

  /// Strict interior test.
  bool strictly_contains(double x, double y) const noexcept;
  /// Closed-set test.
  bool contains(double x, double y) const noexcept;
  bool contains(const Box& other, double tol = 1e-9) const noexcept;

  Box translated(double dx, double dy) const { return Box(cx + dx, cy + dy, w, h); }

  bool operator==(const Box&) const = default;
};

double box_iou(const Box& a, const Box& b) noexcept;

/// Intersection of two boxes, or nothing when the overlap has no area.
bool intersect(const Box& a, const Box& b, Box* out);

/// Moves `b` inward until it lies in [0,width]x[0,height]; a dimension larger
/// than the image is shrunk to the image and centered.
Box clamp_box_to_image(const Box& b, const ImageRef& img);
Box clamp_box_to_frame(const Box& b, double width, double height);

/// Maps an image-space box into the frame whose origin is region's top-left.
Box to_region_local(const Box& b, const Box& region);
Box to_image_coords(const Box& local, const Box& region);

bool almost_equal(const Box& a, const Box& b, double tol = 1e-9) noexcept;

}  // namespace oneclick
