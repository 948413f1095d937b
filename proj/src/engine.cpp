#include "oneclick/engine.hpp"

#include <algorithm>
#include <exception>
#include <set>
#include <stdexcept>

#include "oneclick/matcher.hpp"

namespace oneclick {

namespace {

void validate_clicks(const ImageRef& img, std::span<const ClickAnnotation> clicks) {
  std::set<int> seen;
  for (const ClickAnnotation& c : clicks) {
    if (!img.contains(c.x, c.y)) {
      throw std::invalid_argument("click " + std::to_string(c.sequence) + " lies outside the image");
    }
    if (c.class_id < 0) throw std::invalid_argument("click with negative class id");
    if (c.sequence < 0 || !seen.insert(c.sequence).second) {
      throw std::invalid_argument("click sequence numbers must be unique and non-negative");
    }
  }
}

}  // namespace

RefinementOutcome refine_image(const ImageRef& img, std::span<const ClickAnnotation> clicks,
                               const Detector& detector, const EngineConfig& cfg) {
  cfg.validate();
  validate_clicks(img, clicks);

  RefinementOutcome outcome;
  RefinementStats& stats = outcome.stats;

  const Box frame = img.frame();
  std::optional<double> root_score;
  ++stats.detector_calls;
  try {
    DetectorOutput full = detector.detect(img, Crop{frame, 0});
    for (const Detection& d : full.detections) {
      outcome.raw_detections.emplace_back(to_image_coords(d.box, frame), d.class_id, d.prob,
                                          d.sub_threshold_score);
    }
    root_score = full.sub_threshold_score;
  } catch (const std::exception& e) {
    ++stats.detector_failures;
    stats.full_image_error = e.what();
    outcome.raw_detections.clear();
  }

  const MatchResult match = match_clicks(clicks, outcome.raw_detections, cfg);
  stats.discarded_detections = static_cast<int>(match.unmatched_detections.size());
  outcome.annotations = apply_corrections(clicks, outcome.raw_detections, match, img);

  for (RefinedAnnotation& a : outcome.annotations) {
    if (a.provenance != Provenance::Unresolved) continue;
    auto click = std::find_if(clicks.begin(), clicks.end(),
                              [&](const ClickAnnotation& c) { return c.sequence == a.source_click; });
    HierarchyOutcome h = hierarchical_detect(*click, detector, cfg, img, root_score);
    stats.detector_calls += h.trace.detector_calls;
    stats.detector_failures += h.trace.detector_failures;
    a = h.annotation;
    outcome.traces.push_back(std::move(h.trace));
  }

  for (const RefinedAnnotation& a : outcome.annotations) {
    switch (a.provenance) {
      case Provenance::Confirmed: ++stats.confirmed; break;
      case Provenance::Relabeled: ++stats.relabeled; break;
      case Provenance::Recovered: ++stats.recovered; break;
      case Provenance::Unresolved: ++stats.unresolved; break;
    }
  }
  return outcome;
}

}  // namespace oneclick
