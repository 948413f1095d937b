#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oneclick/config.hpp"
#include "oneclick/types.hpp"

namespace oneclick {

struct MatchPair {
  int click;              // click sequence number
  std::size_t detection;  // index into the detection list
  double distance;
  bool relabel;           // admitted by the class-mismatch pass

  bool operator==(const MatchPair&) const = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_clicks;               // ascending sequence
  std::vector<std::size_t> unmatched_detections;   // ascending index
};

/// match_alpha * sqrt(w * h): scale-adaptive click tolerance.
double match_threshold(const Detection& d, const EngineConfig& cfg) noexcept;

double click_distance(const ClickAnnotation& c, const Detection& d) noexcept;

/// Same class and center within threshold. Shared by the matcher's first pass
/// and the hierarchy's acceptance test.
bool accepts(const ClickAnnotation& c, const Detection& d, const EngineConfig& cfg) noexcept;

/// Greedy one-to-one assignment.
///
/// First pass: same-class pairs within threshold, consumed by ascending
/// distance (ties: higher prob, lower detection index, lower click sequence).
/// Second pass, for clicks still unmatched: wrong-class detections whose box
/// strictly contains the click and whose center is within threshold. Those
/// pairs come back with `relabel` set.
MatchResult match_clicks(std::span<const ClickAnnotation> clicks, std::span<const Detection> dets,
                         const EngineConfig& cfg);

/// Center replacement, relabeling and false-positive removal. Returns one
/// annotation per click, ordered by click sequence; unmatched clicks come back
/// as Unresolved placeholders for the hierarchy.
std::vector<RefinedAnnotation> apply_corrections(std::span<const ClickAnnotation> clicks,
                                                 std::span<const Detection> dets,
                                                 const MatchResult& match, const ImageRef& img);

}  // namespace oneclick
