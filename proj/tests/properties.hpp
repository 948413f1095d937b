#pragma once

// Random instance generators and property checks shared by the unit tests and
// the acceptance binary.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "oneclick/matcher.hpp"

namespace oneclick::testing {

struct MatchInstance {
  std::vector<ClickAnnotation> clicks;
  std::vector<Detection> dets;
  EngineConfig cfg;
};

// Coordinates are multiples of 1/4 so integer translations are exact.
inline double quarter(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_int_distribution<int> q(static_cast<int>(lo * 4), static_cast<int>(hi * 4));
  return q(rng) / 4.0;
}

/// Clicks scattered around detections with a few classes, so both passes and
/// contested detections show up regularly.
inline MatchInstance random_match_instance(std::mt19937_64& rng) {
  MatchInstance inst;
  std::uniform_int_distribution<int> n_dets(0, 9), n_clicks(0, 8), cls(0, 2);
  std::uniform_real_distribution<double> alpha(0.2, 1.0), unit(0.0, 1.0);
  inst.cfg.match_alpha = alpha(rng);

  const int m = n_dets(rng);
  for (int i = 0; i < m; ++i) {
    const Box b(quarter(rng, 4000, 4400), quarter(rng, 4000, 4300), quarter(rng, 8, 120), quarter(rng, 8, 120));
    inst.dets.emplace_back(b, cls(rng), 0.5 + 0.5 * unit(rng));
  }
  const int n = n_clicks(rng);
  for (int i = 0; i < n; ++i) {
    ClickAnnotation c;
    if (!inst.dets.empty() && unit(rng) < 0.8) {
      const Detection& d = inst.dets[static_cast<std::size_t>(rng() % inst.dets.size())];
      c.x = d.box.cx + quarter(rng, -0.6, 0.6) * d.box.w;
      c.y = d.box.cy + quarter(rng, -0.6, 0.6) * d.box.h;
      c.x = std::round(c.x * 4) / 4;
      c.y = std::round(c.y * 4) / 4;
    } else {
      c.x = quarter(rng, 4000, 4400);
      c.y = quarter(rng, 4000, 4300);
    }
    c.class_id = cls(rng);
    c.sequence = i;
    inst.clicks.push_back(c);
  }
  return inst;
}

/// Every click and detection accounted for exactly once, and every pair
/// admissible under its pass.
inline bool one_to_one_holds(const MatchInstance& inst) {
  const MatchResult m = match_clicks(inst.clicks, inst.dets, inst.cfg);
  std::multiset<int> clicks(m.unmatched_clicks.begin(), m.unmatched_clicks.end());
  std::multiset<std::size_t> dets(m.unmatched_detections.begin(), m.unmatched_detections.end());
  for (const MatchPair& p : m.pairs) {
    clicks.insert(p.click);
    dets.insert(p.detection);
    if (p.click < 0 || static_cast<std::size_t>(p.click) >= inst.clicks.size()) return false;
    if (p.detection >= inst.dets.size()) return false;
    const ClickAnnotation& c = inst.clicks[static_cast<std::size_t>(p.click)];
    const Detection& d = inst.dets[p.detection];
    const double dist = std::hypot(c.x - d.box.cx, c.y - d.box.cy);
    if (dist > inst.cfg.match_alpha * std::sqrt(d.box.w * d.box.h)) return false;
    if (p.relabel) {
      const Corners k = d.box.corners();
      if (!(c.x > k.x1 && c.x < k.x2 && c.y > k.y1 && c.y < k.y2)) return false;
    } else if (c.class_id != d.class_id) {
      return false;
    }
  }
  if (clicks.size() != inst.clicks.size() || dets.size() != inst.dets.size()) return false;
  for (std::size_t i = 0; i < inst.clicks.size(); ++i) {
    if (clicks.count(static_cast<int>(i)) != 1) return false;
  }
  for (std::size_t i = 0; i < inst.dets.size(); ++i) {
    if (dets.count(i) != 1) return false;
  }
  return true;
}

/// Raising match_alpha never lowers the number of pairs.
inline bool threshold_monotone_holds(const MatchInstance& inst) {
  MatchInstance wider = inst;
  std::size_t prev = match_clicks(inst.clicks, inst.dets, inst.cfg).pairs.size();
  for (double factor : {1.1, 1.5, 2.0, 3.0}) {
    wider.cfg.match_alpha = inst.cfg.match_alpha * factor;
    const std::size_t now = match_clicks(wider.clicks, wider.dets, wider.cfg).pairs.size();
    if (now < prev) return false;
    prev = now;
  }
  return true;
}

/// Shifting clicks, detections and the viewport shifts every output box by
/// the same offset and keeps pairing and provenance.
inline bool translation_equivariant_holds(const MatchInstance& inst, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> shift(-500, 500);
  const double dx = shift(rng), dy = shift(rng);
  const ImageRef img("img", 10000, 10000);

  MatchInstance moved = inst;
  for (ClickAnnotation& c : moved.clicks) {
    c.x += dx;
    c.y += dy;
  }
  for (Detection& d : moved.dets) d.box = d.box.translated(dx, dy);

  const MatchResult a = match_clicks(inst.clicks, inst.dets, inst.cfg);
  const MatchResult b = match_clicks(moved.clicks, moved.dets, moved.cfg);
  if (a.unmatched_clicks != b.unmatched_clicks || a.unmatched_detections != b.unmatched_detections) return false;
  if (a.pairs.size() != b.pairs.size()) return false;
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    if (a.pairs[i].click != b.pairs[i].click || a.pairs[i].detection != b.pairs[i].detection ||
        a.pairs[i].relabel != b.pairs[i].relabel) {
      return false;
    }
  }
  const auto ra = apply_corrections(inst.clicks, inst.dets, a, img);
  const auto rb = apply_corrections(moved.clicks, moved.dets, b, img);
  if (ra.size() != rb.size()) return false;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    if (ra[i].provenance != rb[i].provenance || ra[i].class_id != rb[i].class_id) return false;
    if (ra[i].box.has_value() != rb[i].box.has_value()) return false;
    if (ra[i].box && !(ra[i].box->translated(dx, dy) == *rb[i].box)) return false;
  }
  return true;
}

/// n same-class detections, each with one intended click near its center and
/// every other click-detection pair farther than twice the largest threshold.
/// The greedy result must equal the only feasible perfect matching, found by
/// enumerating all n! assignments.
inline bool well_separated_agrees(std::mt19937_64& rng, int n) {
  EngineConfig cfg;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Detection> dets;
  std::vector<ClickAnnotation> clicks;
  const double max_size = 60.0;
  const double max_threshold = cfg.match_alpha * max_size;
  while (static_cast<int>(dets.size()) < n) {
    const double cx = 100 + 1800 * unit(rng), cy = 100 + 1800 * unit(rng);
    const bool clear = std::all_of(dets.begin(), dets.end(), [&](const Detection& d) {
      return std::hypot(d.box.cx - cx, d.box.cy - cy) > 5 * max_threshold;
    });
    if (!clear) continue;
    const double w = 10 + (max_size - 10) * unit(rng), h = 10 + (max_size - 10) * unit(rng);
    dets.emplace_back(Box(cx, cy, w, h), 0, 0.5 + 0.5 * unit(rng));
  }
  // Clicks go in a shuffled order so sequence != detection index.
  std::vector<int> owner(static_cast<std::size_t>(n));
  std::iota(owner.begin(), owner.end(), 0);
  std::shuffle(owner.begin(), owner.end(), rng);
  for (int s = 0; s < n; ++s) {
    const Detection& d = dets[static_cast<std::size_t>(owner[static_cast<std::size_t>(s)])];
    const double r = 0.9 * cfg.match_alpha * std::sqrt(d.box.w * d.box.h) * unit(rng);
    const double t = 2 * M_PI * unit(rng);
    clicks.push_back({d.box.cx + r * std::cos(t), d.box.cy + r * std::sin(t), 0, s});
  }
  for (const ClickAnnotation& c : clicks) {
    int near = 0;
    for (const Detection& d : dets) near += std::hypot(c.x - d.box.cx, c.y - d.box.cy) <= 2 * max_threshold;
    if (near != 1) return false;  // generator broke its own precondition
  }

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> feasible;
  do {
    bool ok = true;
    for (int s = 0; s < n && ok; ++s) {
      const ClickAnnotation& c = clicks[static_cast<std::size_t>(s)];
      const Detection& d = dets[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])];
      ok = std::hypot(c.x - d.box.cx, c.y - d.box.cy) <= cfg.match_alpha * std::sqrt(d.box.w * d.box.h);
    }
    if (ok) feasible.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (feasible.size() != 1) return false;

  const MatchResult m = match_clicks(clicks, dets, cfg);
  if (m.pairs.size() != static_cast<std::size_t>(n)) return false;
  for (const MatchPair& p : m.pairs) {
    if (static_cast<int>(p.detection) != feasible[0][static_cast<std::size_t>(p.click)]) return false;
  }
  return true;
}

}  // namespace oneclick::testing
