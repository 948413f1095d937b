#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace oneclick {

/// Anchor template as fractions of the parent region's dimensions.
struct Anchor {
  double w_frac;
  double h_frac;

  bool operator==(const Anchor&) const = default;
};

enum class PruningMode { Exhaustive, BestFirst };

std::string_view to_string(PruningMode m) noexcept;
PruningMode pruning_from_string(std::string_view s);

/// Largest K for which default anchors exist.
inline constexpr int kMaxDefaultAnchors = 7;

/// First `k` entries of the nested default anchor list (1 <= k <= 7).
std::vector<Anchor> default_anchors(int k);

struct EngineConfig {
  std::vector<Anchor> anchors = default_anchors(5);
  int max_depth = 3;
  double match_alpha = 0.5;
  double context_factor = 1.5;
  double depth_penalty = 0.9;
  PruningMode pruning = PruningMode::BestFirst;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const EngineConfig&) const = default;
};

}  // namespace oneclick
