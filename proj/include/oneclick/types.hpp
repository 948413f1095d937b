#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "oneclick/box.hpp"

namespace oneclick {

using ClassId = int;

struct ImageRef {
  std::string id;
  int width;
  int height;
  std::string uri;

  ImageRef(std::string id, int width, int height, std::string uri = {});

  Box frame() const { return Box(width / 2.0, height / 2.0, width, height); }
  bool contains(double x, double y) const noexcept {
    return x >= 0.0 && y >= 0.0 && x <= width && y <= height;
  }

  bool operator==(const ImageRef&) const = default;
};

/// One human click: the object's center and the class that was active.
struct ClickAnnotation {
  double x = 0.0;
  double y = 0.0;
  ClassId class_id = 0;
  int sequence = 0;

  bool operator==(const ClickAnnotation&) const = default;
};

struct Detection {
  Box box;
  ClassId class_id;
  double prob;
  std::optional<double> sub_threshold_score;

  Detection(Box box, ClassId class_id, double prob,
            std::optional<double> sub_threshold_score = std::nullopt);

  bool operator==(const Detection&) const = default;
};

enum class Provenance { Confirmed, Relabeled, Recovered, Unresolved };

std::string_view to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view s);

/// Final per-click output. Unresolved entries carry no box and a zero
/// probability; every other entry has a box and a probability in (0,1].
struct RefinedAnnotation {
  std::optional<Box> box;
  ClassId class_id = 0;
  double effective_prob = 0.0;
  Provenance provenance = Provenance::Unresolved;
  int source_click = 0;
  int depth = 0;

  static RefinedAnnotation unresolved(const ClickAnnotation& click);

  /// Throws std::logic_error when the provenance/depth/box rules are broken.
  void validate() const;

  bool operator==(const RefinedAnnotation&) const = default;
};

}  // namespace oneclick
