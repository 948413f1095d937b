#include "oneclick/eval.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace oneclick {

std::vector<Prediction> predictions_from(std::span<const RefinedAnnotation> annotations) {
  std::vector<Prediction> out;
  for (const RefinedAnnotation& a : annotations) {
    if (a.provenance == Provenance::Unresolved || !a.box) continue;
    out.push_back({*a.box, a.class_id, a.effective_prob});
  }
  return out;
}

std::vector<Prediction> predictions_from(std::span<const Detection> detections) {
  std::vector<Prediction> out;
  out.reserve(detections.size());
  for (const Detection& d : detections) out.push_back({d.box, d.class_id, d.prob});
  return out;
}

namespace {

struct Ranked {
  const Prediction* pred;
  std::size_t image;
};

bool ranked_before(const Ranked& a, const Ranked& b) {
  const Prediction& p = *a.pred;
  const Prediction& q = *b.pred;
  if (p.score != q.score) return p.score > q.score;
  return std::tie(p.class_id, p.box.cx, p.box.cy, p.box.w, p.box.h, a.image) <
         std::tie(q.class_id, q.box.cx, q.box.cy, q.box.w, q.box.h, b.image);
}

// Area under the monotone precision envelope, summed at every recall step.
double all_point_ap(const std::vector<bool>& hits, int total_gt) {
  if (total_gt == 0) return 0.0;
  const std::size_t n = hits.size();
  std::vector<double> precision(n), recall(n);
  int tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (hits[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / total_gt;
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

}  // namespace

EvalReport evaluate(std::span<const std::vector<Prediction>> preds,
                    std::span<const GroundTruthImage> truth, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw std::invalid_argument("iou_threshold: must be in (0, 1)");
  }
  if (preds.size() != truth.size()) {
    throw std::invalid_argument("evaluate: one prediction list per ground-truth image required");
  }

  std::map<ClassId, int> gt_per_class;
  for (const GroundTruthImage& gt : truth) {
    for (const GroundTruthObject& o : gt.objects) ++gt_per_class[o.class_id];
  }
  std::map<ClassId, std::vector<Ranked>> by_class;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (const Prediction& p : preds[i]) by_class[p.class_id].push_back({&p, i});
  }

  std::vector<std::vector<bool>> claimed(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) claimed[i].assign(truth[i].objects.size(), false);

  EvalReport report;
  for (const auto& [cls, n_gt] : gt_per_class) report.counts[cls].fn = n_gt;

  for (auto& [cls, ranked] : by_class) {
    std::sort(ranked.begin(), ranked.end(), ranked_before);
    std::vector<bool> hits;
    hits.reserve(ranked.size());
    ClassCounts& counts = report.counts[cls];
    for (const Ranked& r : ranked) {
      const auto& objects = truth[r.image].objects;
      double best_iou = 0.0;
      std::optional<std::size_t> best;
      for (std::size_t g = 0; g < objects.size(); ++g) {
        if (objects[g].class_id != cls || claimed[r.image][g]) continue;
        const double iou = box_iou(r.pred->box, objects[g].box);
        if (iou >= iou_threshold && iou > best_iou) {
          best_iou = iou;
          best = g;
        }
      }
      if (best) {
        claimed[r.image][*best] = true;
        ++counts.tp;
        --counts.fn;
        hits.push_back(true);
      } else {
        ++counts.fp;
        hits.push_back(false);
      }
    }
    auto gt = gt_per_class.find(cls);
    if (gt != gt_per_class.end()) report.per_class_ap[cls] = all_point_ap(hits, gt->second);
  }
  for (const auto& [cls, n_gt] : gt_per_class) report.per_class_ap.try_emplace(cls, 0.0);

  if (!report.per_class_ap.empty()) {
    double sum = 0.0;
    for (const auto& [cls, ap] : report.per_class_ap) sum += ap;
    report.map = sum / static_cast<double>(report.per_class_ap.size());
  }
  int tp = 0, fn = 0;
  for (const auto& [cls, c] : report.counts) {
    tp += c.tp;
    fn += c.fn;
  }
  report.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  return report;
}

EvalReport evaluate(std::span<const std::vector<RefinedAnnotation>> preds,
                    std::span<const GroundTruthImage> truth, double iou_threshold) {
  std::vector<std::vector<Prediction>> converted;
  converted.reserve(preds.size());
  for (const auto& p : preds) converted.push_back(predictions_from(p));
  return evaluate(std::span<const std::vector<Prediction>>(converted), truth, iou_threshold);
}

}  // namespace oneclick
