#include "oneclick/hierarchy.hpp"

#include <algorithm>
#include <exception>
#include <numeric>

#include "oneclick/matcher.hpp"

namespace oneclick {

namespace {

// Scores of exactly zero would make a recovered probability vanish.
constexpr double kMinMultiplier = 1e-6;

struct Candidate {
  Detection detection;
  double value;  // probability relative to the level that produced it
  int depth;
  std::vector<int> path;
};

class ProposalSearch {
 public:
  ProposalSearch(const ClickAnnotation& click, const Detector& detector, const EngineConfig& cfg,
                 const ImageRef& img, HierarchyTrace& trace)
      : click_(click), detector_(detector), cfg_(cfg), img_(img), trace_(trace) {}

  std::optional<Candidate> group(const Box& parent_region, int depth, std::vector<ProposalNode>& nodes) {
    for (const Proposal& p : make_proposals(click_, parent_region, cfg_, img_)) {
      nodes.push_back(evaluate(p, depth));
    }

    // Any accepted detection at this level ends the descent.
    std::optional<std::size_t> winner;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!nodes[i].outcome) continue;
      if (!winner || nodes[i].outcome->prob > nodes[*winner].outcome->prob) winner = i;
    }
    if (winner) {
      trace_.nodes_expanded += static_cast<int>(nodes.size());
      const ProposalNode& n = nodes[*winner];
      return Candidate{*n.outcome, n.outcome->prob, depth, {n.anchor_index}};
    }
    if (depth >= cfg_.max_depth) {
      trace_.nodes_expanded += static_cast<int>(nodes.size());
      return std::nullopt;
    }

    std::optional<Candidate> best;
    std::size_t best_pos = 0;
    auto descend = [&](std::size_t i) {
      ProposalNode& n = nodes[i];
      ++trace_.nodes_expanded;
      auto sub = group(n.region, depth + 1, n.children);
      if (!sub) return;
      sub->value *= multiplier(n);
      sub->path.insert(sub->path.begin(), n.anchor_index);
      if (!best || sub->value > best->value || (sub->value == best->value && i < best_pos)) {
        best = std::move(sub);
        best_pos = i;
      }
    };

    if (cfg_.pruning == PruningMode::Exhaustive) {
      for (std::size_t i = 0; i < nodes.size(); ++i) descend(i);
      return best;
    }

    const std::vector<std::size_t> order = expand_order(nodes);
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (best && cutoff_reached(best->value, nodes[order[k]].priority)) {
        for (std::size_t r = k; r < order.size(); ++r) nodes[order[r]].pruned = true;
        trace_.nodes_pruned += static_cast<int>(order.size() - k);
        break;
      }
      descend(order[k]);
    }
    return best;
  }

  double root_multiplier(std::optional<double> root_score) const {
    if (detector_.reports_sub_threshold() && root_score) return std::max(*root_score, kMinMultiplier);
    return cfg_.depth_penalty;
  }

 private:
  double multiplier(const ProposalNode& n) const {
    return n.sub_threshold_score ? *n.sub_threshold_score : cfg_.depth_penalty;
  }

  ProposalNode evaluate(const Proposal& p, int depth) {
    ProposalNode node(p.region);
    node.depth = depth;
    node.anchor_index = p.anchor_index;
    ++trace_.nodes_generated;
    ++trace_.detector_calls;

    DetectorOutput out;
    try {
      out = detector_.detect(img_, Crop{p.region, depth});
    } catch (const std::exception&) {
      node.failed = true;
      ++trace_.detector_failures;
      return node;
    }

    if (detector_.reports_sub_threshold() && out.sub_threshold_score) {
      node.sub_threshold_score = std::max(*out.sub_threshold_score, kMinMultiplier);
      node.priority = *node.sub_threshold_score;
    }

    const Detection* chosen = nullptr;
    double chosen_dist = 0.0;
    std::vector<Detection> mapped;
    mapped.reserve(out.detections.size());
    for (const Detection& d : out.detections) {
      mapped.emplace_back(to_image_coords(d.box, p.region), d.class_id, d.prob, d.sub_threshold_score);
    }
    for (const Detection& d : mapped) {
      if (!accepts(click_, d, cfg_)) continue;
      const double dist = click_distance(click_, d);
      if (!chosen || d.prob > chosen->prob || (d.prob == chosen->prob && dist < chosen_dist)) {
        chosen = &d;
        chosen_dist = dist;
      }
    }
    if (chosen) node.outcome = *chosen;
    return node;
  }

  const ClickAnnotation& click_;
  const Detector& detector_;
  const EngineConfig& cfg_;
  const ImageRef& img_;
  HierarchyTrace& trace_;
};

}  // namespace

std::vector<Proposal> make_proposals(const ClickAnnotation& click, const Box& parent_region,
                                     const EngineConfig& cfg, const ImageRef& img) {
  std::vector<Proposal> out;
  out.reserve(cfg.anchors.size());
  for (std::size_t k = 0; k < cfg.anchors.size(); ++k) {
    const Anchor& a = cfg.anchors[k];
    const Box raw(click.x, click.y, a.w_frac * parent_region.w * cfg.context_factor,
                  a.h_frac * parent_region.h * cfg.context_factor);
    const Box region = clamp_box_to_image(raw, img);
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Proposal& p) {
      return almost_equal(p.region, region);
    });
    if (!duplicate) out.push_back({region, static_cast<int>(k)});
  }
  return out;
}

std::vector<std::size_t> expand_order(std::span<const ProposalNode> siblings) {
  std::vector<std::size_t> order(siblings.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return siblings[a].priority > siblings[b].priority;
  });
  return order;
}

HierarchyOutcome hierarchical_detect(const ClickAnnotation& click, const Detector& detector,
                                     const EngineConfig& cfg, const ImageRef& img,
                                     std::optional<double> root_score) {
  cfg.validate();
  HierarchyOutcome outcome;
  HierarchyTrace& trace = outcome.trace;
  trace.root_click = click.sequence;

  ProposalSearch search(click, detector, cfg, img, trace);
  const std::optional<Candidate> best = search.group(img.frame(), 1, trace.tree);

  RefinedAnnotation result = RefinedAnnotation::unresolved(click);
  if (best) {
    result.box = clamp_box_to_image(
        Box(click.x, click.y, best->detection.box.w, best->detection.box.h), img);
    result.effective_prob = best->value * search.root_multiplier(root_score);
    result.provenance = Provenance::Recovered;
    result.depth = best->depth;
    trace.winning_path = best->path;
  }
  trace.result = result;
  outcome.annotation = std::move(result);
  return outcome;
}

}  // namespace oneclick
