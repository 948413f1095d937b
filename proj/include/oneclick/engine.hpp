#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oneclick/config.hpp"
#include "oneclick/detector.hpp"
#include "oneclick/hierarchy.hpp"
#include "oneclick/types.hpp"

namespace oneclick {

struct RefinementStats {
  int confirmed = 0;
  int relabeled = 0;
  int recovered = 0;
  int unresolved = 0;
  int detector_calls = 0;
  int detector_failures = 0;
  int discarded_detections = 0;
  /// Set when the full-image query threw; the pass then ran hierarchy-only.
  std::optional<std::string> full_image_error;

  bool operator==(const RefinementStats&) const = default;
};

struct RefinementOutcome {
  /// Exactly one entry per click, ordered by click sequence.
  std::vector<RefinedAnnotation> annotations;
  std::vector<HierarchyTrace> traces;
  /// Full-image detector output before any click-driven correction.
  std::vector<Detection> raw_detections;
  RefinementStats stats;
};

/// Full pass for one image: detect, match, correct, then recover every
/// unmatched click through the proposal hierarchy. Detections no click claims
/// never reach the output. Throws std::invalid_argument for clicks outside the
/// image or repeated sequence numbers.
RefinementOutcome refine_image(const ImageRef& img, std::span<const ClickAnnotation> clicks,
                               const Detector& detector, const EngineConfig& cfg);

}  // namespace oneclick
