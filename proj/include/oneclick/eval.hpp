#pragma once

#include <map>
#include <span>
#include <vector>

#include "oneclick/dataset.hpp"
#include "oneclick/types.hpp"

namespace oneclick {

/// A scored box, the common currency of raw detections and refined output.
struct Prediction {
  Box box;
  ClassId class_id;
  double score;
};

std::vector<Prediction> predictions_from(std::span<const RefinedAnnotation> annotations);
std::vector<Prediction> predictions_from(std::span<const Detection> detections);

struct ClassCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;

  bool operator==(const ClassCounts&) const = default;
};

struct EvalReport {
  std::map<ClassId, double> per_class_ap;  // classes with ground truth only
  double map = 0.0;
  double recall = 0.0;
  std::map<ClassId, ClassCounts> counts;

  bool operator==(const EvalReport&) const = default;
};

/// VOC-style evaluation with all-point interpolated AP.
///
/// `preds[i]` belongs to `truth[i]`. Per class, predictions are ranked by
/// score (ties: class, cx, cy, w, h, then image index) and each claims the
/// unmatched same-class ground truth of highest IoU if that IoU reaches the
/// threshold. Throws std::invalid_argument for a threshold outside (0,1) or
/// mismatched list lengths.
EvalReport evaluate(std::span<const std::vector<Prediction>> preds,
                    std::span<const GroundTruthImage> truth, double iou_threshold = 0.5);

EvalReport evaluate(std::span<const std::vector<RefinedAnnotation>> preds,
                    std::span<const GroundTruthImage> truth, double iou_threshold = 0.5);

}  // namespace oneclick
