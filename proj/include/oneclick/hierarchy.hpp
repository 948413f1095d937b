#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "oneclick/config.hpp"
#include "oneclick/detector.hpp"
#include "oneclick/types.hpp"

namespace oneclick {

struct Proposal {
  Box region;
  int anchor_index;
};

/// One node of the proposal tree. `priority` is the detector's suppressed
/// score for the region (0 when none was reported); `outcome` is the best
/// detection in the region that passed the click-match rule.
struct ProposalNode {
  explicit ProposalNode(Box r) : region(r) {}

  Box region;
  int depth = 1;
  int anchor_index = 0;
  double priority = 0.0;
  std::optional<double> sub_threshold_score;
  std::optional<Detection> outcome;
  bool pruned = false;
  bool failed = false;
  std::vector<ProposalNode> children;
};

struct HierarchyTrace {
  int root_click = 0;
  int nodes_generated = 0;
  int nodes_expanded = 0;
  int nodes_pruned = 0;
  int detector_calls = 0;
  int detector_failures = 0;
  /// Anchor indices from depth 1 down to the winning node.
  std::vector<int> winning_path;
  RefinedAnnotation result;
  std::vector<ProposalNode> tree;
};

struct HierarchyOutcome {
  RefinedAnnotation annotation;
  HierarchyTrace trace;
};

/// K boxes centered at the click, each anchor scaled by the parent region and
/// the context factor, clamped to the image. Regions that coincide after
/// clamping are kept once, in anchor order.
std::vector<Proposal> make_proposals(const ClickAnnotation& click, const Box& parent_region,
                                     const EngineConfig& cfg, const ImageRef& img);

/// Stable order of descending priority.
std::vector<std::size_t> expand_order(std::span<const ProposalNode> siblings);

/// Best-first cutoff: stop once the best value found reaches the largest
/// priority still waiting.
inline bool cutoff_reached(double best_value, double max_unexpanded_priority) noexcept {
  return best_value >= max_unexpanded_priority;
}

/// Recovers the object under an unmatched click by recursive detection over
/// anchor proposals.
///
/// Within a sibling group the highest-probability accepted detection wins and
/// the search does not descend. Otherwise, while depth < T, every sibling
/// becomes a parent (Exhaustive) or siblings are descended in priority order
/// until the cutoff holds (BestFirst). A value climbing one level is
/// multiplied by that level's sub-threshold score, or by depth_penalty when
/// the detector reported none. `root_score` is the full-image query's score.
HierarchyOutcome hierarchical_detect(const ClickAnnotation& click, const Detector& detector,
                                     const EngineConfig& cfg, const ImageRef& img,
                                     std::optional<double> root_score = std::nullopt);

}  // namespace oneclick
