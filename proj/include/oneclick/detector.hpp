#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oneclick/dataset.hpp"
#include "oneclick/types.hpp"

namespace oneclick {

/// A detector query: an image-space region and its depth in the proposal
/// tree (0 for the full image).
struct Crop {
  Box region;
  int depth = 0;
};

struct DetectorOutput {
  std::vector<Detection> detections;
  /// Best class-agnostic score among candidates the detector suppressed in
  /// this region. Absent when the detector has nothing to report.
  std::optional<double> sub_threshold_score;
};

/// Object detector seen through a crop. Implementations must be safe for
/// concurrent detect() calls.
class Detector {
 public:
  virtual ~Detector() = default;

  virtual bool reports_sub_threshold() const noexcept = 0;

  /// Returns detections in region-local coordinates (origin at the region's
  /// top-left corner); every box lies inside [0,region.w]x[0,region.h].
  /// May throw; callers treat a throw as "no detection".
  virtual DetectorOutput detect(const ImageRef& image, const Crop& crop) const = 0;
};

/// Error model for the simulated detector. Field names double as the JSON
/// keys of profile files.
struct NoiseProfile {
  double p_miss = 0.0;
  double p_mislabel = 0.0;
  double p_false_positive = 0.0;  // expected false positives per full image
  double center_jitter = 0.0;     // sigma as a fraction of box size
  double size_jitter = 0.0;
  double recover_gain = 1.6;      // g: per-depth detection-rate multiplier
  std::uint64_t seed = 0;
  /// Report a score for every region (background regions get a low one), so
  /// best-first priorities bound everything reachable below them.
  bool admissible = false;
  /// Fraction of an object's area that must fall inside a region before the
  /// detector can see it there.
  double min_visible = 0.75;

  void validate() const;

  /// min(1, (1 - p_miss) * g^depth).
  double emission_rate(int depth) const noexcept;

  bool operator==(const NoiseProfile&) const = default;
};

/// Simulated detections for `region` in image coordinates. A pure function
/// of its arguments: every draw is keyed on (seed, image id, region quantized
/// to 1e-3 px, object index), never on call order.
DetectorOutput sim_detect(const GroundTruthImage& truth, const Crop& crop, const NoiseProfile& profile);

/// Detector backed by ground truth plus seeded error injection.
class SimulatedDetector final : public Detector {
 public:
  SimulatedDetector(GroundTruthImage truth, NoiseProfile profile);

  bool reports_sub_threshold() const noexcept override { return true; }
  DetectorOutput detect(const ImageRef& image, const Crop& crop) const override;

  const GroundTruthImage& truth() const noexcept { return truth_; }
  const NoiseProfile& profile() const noexcept { return profile_; }

 private:
  GroundTruthImage truth_;
  NoiseProfile profile_;
};

}  // namespace oneclick
