#include "oneclick/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "oneclick/config.hpp"

namespace oneclick {

ImageRef::ImageRef(std::string id_, int width_, int height_, std::string uri_)
    : id(std::move(id_)), width(width_), height(height_), uri(std::move(uri_)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image '" + id + "': width and height must be >= 1");
  }
}

Detection::Detection(Box box_, ClassId class_id_, double prob_, std::optional<double> sub)
    : box(box_), class_id(class_id_), prob(prob_), sub_threshold_score(sub) {
  if (!(prob > 0.0 && prob <= 1.0)) {
    throw std::invalid_argument("detection: prob must be in (0, 1]");
  }
  if (sub && !(*sub >= 0.0 && *sub <= 1.0)) {
    throw std::invalid_argument("detection: sub_threshold_score must be in [0, 1]");
  }
  if (class_id < 0) throw std::invalid_argument("detection: negative class id");
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::Confirmed: return "confirmed";
    case Provenance::Relabeled: return "relabeled";
    case Provenance::Recovered: return "recovered";
    case Provenance::Unresolved: return "unresolved";
  }
  return "unresolved";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "confirmed") return Provenance::Confirmed;
  if (s == "relabeled") return Provenance::Relabeled;
  if (s == "recovered") return Provenance::Recovered;
  if (s == "unresolved") return Provenance::Unresolved;
  throw std::invalid_argument("unknown provenance '" + std::string(s) + "'");
}

RefinedAnnotation RefinedAnnotation::unresolved(const ClickAnnotation& click) {
  RefinedAnnotation r;
  r.class_id = click.class_id;
  r.source_click = click.sequence;
  return r;
}

void RefinedAnnotation::validate() const {
  if (provenance == Provenance::Unresolved) {
    if (box) throw std::logic_error("unresolved annotation must not carry a box");
    if (depth != 0) throw std::logic_error("unresolved annotation must have depth 0");
    return;
  }
  if (!box) throw std::logic_error("resolved annotation requires a box");
  if (!(effective_prob > 0.0 && effective_prob <= 1.0)) {
    throw std::logic_error("effective_prob outside (0, 1]");
  }
  if (provenance == Provenance::Recovered ? depth < 1 : depth != 0) {
    throw std::logic_error("depth inconsistent with provenance");
  }
}

std::string_view to_string(PruningMode m) noexcept {
  return m == PruningMode::Exhaustive ? "exhaustive" : "best-first";
}

PruningMode pruning_from_string(std::string_view s) {
  if (s == "exhaustive") return PruningMode::Exhaustive;
  if (s == "best-first" || s == "bestfirst" || s == "best_first") return PruningMode::BestFirst;
  throw std::invalid_argument("unknown pruning mode '" + std::string(s) + "'");
}

std::vector<Anchor> default_anchors(int k) {
  static const Anchor kNested[kMaxDefaultAnchors] = {
      {0.08, 0.12}, {0.20, 0.30}, {0.45, 0.55}, {0.12, 0.30},
      {0.55, 0.30}, {0.30, 0.12}, {0.80, 0.80},
  };
  if (k < 1 || k > kMaxDefaultAnchors) {
    throw std::invalid_argument("default anchors exist for K in [1, 7], got " + std::to_string(k));
  }
  return {kNested, kNested + k};
}

void EngineConfig::validate() const {
  if (anchors.empty()) throw std::invalid_argument("anchors: must be non-empty");
  for (const Anchor& a : anchors) {
    if (!(a.w_frac > 0.0 && a.w_frac <= 1.0) || !(a.h_frac > 0.0 && a.h_frac <= 1.0)) {
      throw std::invalid_argument("anchors: fractions must lie in (0, 1]");
    }
  }
  if (max_depth < 1) throw std::invalid_argument("max_depth: must be >= 1");
  if (!(match_alpha > 0.0) || !std::isfinite(match_alpha)) {
    throw std::invalid_argument("match_alpha: must be positive");
  }
  if (!(context_factor >= 1.0) || !std::isfinite(context_factor)) {
    throw std::invalid_argument("context_factor: must be >= 1");
  }
  if (!(depth_penalty > 0.0 && depth_penalty <= 1.0)) {
    throw std::invalid_argument("depth_penalty: must be in (0, 1]");
  }
}

}  // namespace oneclick
