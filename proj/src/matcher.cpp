#include "oneclick/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace oneclick {

double match_threshold(const Detection& d, const EngineConfig& cfg) noexcept {
  return cfg.match_alpha * std::sqrt(d.box.w * d.box.h);
}

double click_distance(const ClickAnnotation& c, const Detection& d) noexcept {
  return std::hypot(c.x - d.box.cx, c.y - d.box.cy);
}

bool accepts(const ClickAnnotation& c, const Detection& d, const EngineConfig& cfg) noexcept {
  return c.class_id == d.class_id && click_distance(c, d) <= match_threshold(d, cfg);
}

namespace {

struct Candidate {
  double distance;
  double prob;
  std::size_t det;
  int click;
  std::size_t click_pos;
};

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  if (a.prob != b.prob) return a.prob > b.prob;
  if (a.det != b.det) return a.det < b.det;
  return a.click < b.click;
}

void consume(std::vector<Candidate>& cands, std::vector<bool>& click_used,
             std::vector<bool>& det_used, bool relabel, std::vector<MatchPair>& out) {
  std::sort(cands.begin(), cands.end(), candidate_before);
  for (const Candidate& c : cands) {
    if (click_used[c.click_pos] || det_used[c.det]) continue;
    click_used[c.click_pos] = true;
    det_used[c.det] = true;
    out.push_back({c.click, c.det, c.distance, relabel});
  }
}

}  // namespace

MatchResult match_clicks(std::span<const ClickAnnotation> clicks, std::span<const Detection> dets,
                         const EngineConfig& cfg) {
  std::vector<bool> click_used(clicks.size(), false);
  std::vector<bool> det_used(dets.size(), false);
  std::vector<MatchPair> greedy;

  std::vector<Candidate> same_class, mismatched;
  for (std::size_t i = 0; i < clicks.size(); ++i) {
    for (std::size_t j = 0; j < dets.size(); ++j) {
      const double dist = click_distance(clicks[i], dets[j]);
      if (dist > match_threshold(dets[j], cfg)) continue;
      const Candidate cand{dist, dets[j].prob, j, clicks[i].sequence, i};
      if (dets[j].class_id == clicks[i].class_id) {
        same_class.push_back(cand);
      } else if (dets[j].box.strictly_contains(clicks[i].x, clicks[i].y)) {
        mismatched.push_back(cand);
      }
    }
  }
  consume(same_class, click_used, det_used, false, greedy);
  consume(mismatched, click_used, det_used, true, greedy);

  // Augmenting paths over both edge kinds. Greedy alone can strand a click
  // when a closer pair takes its only detection; flipping alternating paths
  // reaches maximum cardinality, which keeps the pair count monotone in the
  // threshold. Greedy pairs survive unless a path runs through them.
  std::vector<std::vector<std::pair<Candidate, bool>>> edges(clicks.size());
  for (const Candidate& c : same_class) edges[c.click_pos].push_back({c, false});
  for (const Candidate& c : mismatched) edges[c.click_pos].push_back({c, true});
  std::vector<std::optional<std::size_t>> owner(dets.size());  // det -> click position
  std::vector<std::optional<std::pair<Candidate, bool>>> held(clicks.size());
  for (std::size_t i = 0; i < clicks.size(); ++i) {
    for (const auto& e : edges[i]) {
      const bool kept = std::any_of(greedy.begin(), greedy.end(), [&](const MatchPair& p) {
        return p.click == e.first.click && p.detection == e.first.det && p.relabel == e.second;
      });
      if (kept) {
        held[i] = e;
        owner[e.first.det] = i;
      }
    }
  }

  std::vector<bool> visited(dets.size());
  std::function<bool(std::size_t)> augment = [&](std::size_t i) {
    for (const auto& e : edges[i]) {
      const std::size_t j = e.first.det;
      if (visited[j]) continue;
      visited[j] = true;
      if (!owner[j] || augment(*owner[j])) {
        owner[j] = i;
        held[i] = e;
        return true;
      }
    }
    return false;
  };
  std::vector<std::size_t> order(clicks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return clicks[a].sequence < clicks[b].sequence; });
  for (std::size_t i : order) {
    if (held[i]) continue;
    std::fill(visited.begin(), visited.end(), false);
    augment(i);
  }

  MatchResult result;
  std::vector<std::pair<Candidate, bool>> chosen;
  for (std::size_t i = 0; i < clicks.size(); ++i) {
    if (held[i]) {
      chosen.push_back(*held[i]);
    } else {
      result.unmatched_clicks.push_back(clicks[i].sequence);
    }
  }
  std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return !a.second;
    return candidate_before(a.first, b.first);
  });
  for (const auto& [c, relabel] : chosen) result.pairs.push_back({c.click, c.det, c.distance, relabel});
  std::sort(result.unmatched_clicks.begin(), result.unmatched_clicks.end());
  for (std::size_t j = 0; j < dets.size(); ++j) {
    if (!owner[j]) result.unmatched_detections.push_back(j);
  }
  return result;
}

std::vector<RefinedAnnotation> apply_corrections(std::span<const ClickAnnotation> clicks,
                                                 std::span<const Detection> dets,
                                                 const MatchResult& match, const ImageRef& img) {
  std::map<int, const ClickAnnotation*> by_sequence;
  for (const ClickAnnotation& c : clicks) by_sequence.emplace(c.sequence, &c);

  std::map<int, RefinedAnnotation> out;
  for (const MatchPair& p : match.pairs) {
    auto it = by_sequence.find(p.click);
    if (it == by_sequence.end() || p.detection >= dets.size()) {
      throw std::invalid_argument("match result does not belong to these clicks/detections");
    }
    const ClickAnnotation& click = *it->second;
    const Detection& det = dets[p.detection];

    RefinedAnnotation r;
    r.box = clamp_box_to_image(Box(click.x, click.y, det.box.w, det.box.h), img);
    r.class_id = click.class_id;
    r.effective_prob = det.prob;
    r.provenance = p.relabel ? Provenance::Relabeled : Provenance::Confirmed;
    r.source_click = click.sequence;
    r.depth = 0;
    out.emplace(click.sequence, r);
  }
  for (int seq : match.unmatched_clicks) {
    auto it = by_sequence.find(seq);
    if (it == by_sequence.end()) {
      throw std::invalid_argument("match result does not belong to these clicks/detections");
    }
    out.emplace(seq, RefinedAnnotation::unresolved(*it->second));
  }

  std::vector<RefinedAnnotation> ordered;
  ordered.reserve(out.size());
  for (auto& [seq, r] : out) ordered.push_back(std::move(r));
  return ordered;
}

}  // namespace oneclick
