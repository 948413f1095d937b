#pragma once

// Test-only oracles and scaffolding. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "oneclick/detector.hpp"
#include "oneclick/types.hpp"

namespace oneclick::testing {

/// IoU by counting unit cells; boxes must have integer corners.
inline double raster_iou(const Box& a, const Box& b) {
  const Corners p = a.corners();
  const Corners q = b.corners();
  const int x0 = static_cast<int>(std::floor(std::min(p.x1, q.x1)));
  const int x1 = static_cast<int>(std::ceil(std::max(p.x2, q.x2)));
  const int y0 = static_cast<int>(std::floor(std::min(p.y1, q.y1)));
  const int y1 = static_cast<int>(std::ceil(std::max(p.y2, q.y2)));
  long inter = 0, uni = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const bool in_a = px > p.x1 && px < p.x2 && py > p.y1 && py < p.y2;
      const bool in_b = px > q.x1 && px < q.x2 && py > q.y1 && py < q.y2;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Detector driven by a callback that answers in image coordinates.
class ScriptedDetector final : public Detector {
 public:
  using Fn = std::function<DetectorOutput(const Crop&)>;

  explicit ScriptedDetector(Fn fn, bool reports = true) : fn_(std::move(fn)), reports_(reports) {}

  bool reports_sub_threshold() const noexcept override { return reports_; }

  DetectorOutput detect(const ImageRef&, const Crop& crop) const override {
    ++calls_;
    DetectorOutput out = fn_(crop);
    for (Detection& d : out.detections) d.box = to_region_local(d.box, crop.region);
    return out;
  }

  int calls() const { return calls_.load(); }

 private:
  Fn fn_;
  bool reports_;
  mutable std::atomic<int> calls_{0};
};

/// All-point AP computed from the other direction: for every true positive
/// at rank k, add the best precision reachable at rank >= k, then divide by
/// the ground-truth count.
inline double reference_ap(const std::vector<bool>& ranked_hits, int n_gt) {
  if (n_gt == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < ranked_hits.size(); ++k) {
    if (!ranked_hits[k]) continue;
    double best = 0.0;
    int tp = 0;
    for (std::size_t j = 0; j < ranked_hits.size(); ++j) {
      tp += ranked_hits[j];
      if (j >= k) best = std::max(best, static_cast<double>(tp) / static_cast<double>(j + 1));
    }
    sum += best;
  }
  return sum / n_gt;
}

/// VOC corners -> center form by enumerating the covered pixels: pixel i
/// (1-based) spans [i - 1, i].
inline Box voc_pixels_to_box(int xmin, int ymin, int xmax, int ymax) {
  double left = 1e18, right = -1e18, top = 1e18, bottom = -1e18;
  for (int i = xmin; i <= xmax; ++i) {
    left = std::min(left, i - 1.0);
    right = std::max(right, static_cast<double>(i));
  }
  for (int j = ymin; j <= ymax; ++j) {
    top = std::min(top, j - 1.0);
    bottom = std::max(bottom, static_cast<double>(j));
  }
  return Box((left + right) / 2.0, (top + bottom) / 2.0, right - left, bottom - top);
}

}  // namespace oneclick::testing
