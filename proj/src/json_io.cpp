#include "oneclick/json_io.hpp"

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

namespace oneclick {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string(key) + ": wrong type");
  }
}

}  // namespace

EngineConfig engine_config_from_json(const json& j, EngineConfig cfg) {
  reject_unknown(j,
                 {"anchors", "k", "max_depth", "match_alpha", "context_factor", "depth_penalty",
                  "pruning", "seed"},
                 "engine config");
  if (j.contains("anchors") && j.contains("k")) {
    throw std::invalid_argument("engine config: give either anchors or k, not both");
  }
  if (j.contains("k")) {
    int k = 0;
    read(j, "k", k);
    cfg.anchors = default_anchors(k);
  }
  if (j.contains("anchors")) {
    std::vector<std::vector<double>> raw;
    read(j, "anchors", raw);
    cfg.anchors.clear();
    for (const auto& pair : raw) {
      if (pair.size() != 2) throw std::invalid_argument("anchors: each entry must be [w_frac, h_frac]");
      cfg.anchors.push_back({pair[0], pair[1]});
    }
  }
  read(j, "max_depth", cfg.max_depth);
  read(j, "match_alpha", cfg.match_alpha);
  read(j, "context_factor", cfg.context_factor);
  read(j, "depth_penalty", cfg.depth_penalty);
  if (j.contains("pruning")) {
    std::string mode;
    read(j, "pruning", mode);
    cfg.pruning = pruning_from_string(mode);
  }
  read(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

json to_json(const EngineConfig& cfg) {
  json anchors = json::array();
  for (const Anchor& a : cfg.anchors) anchors.push_back({a.w_frac, a.h_frac});
  return {{"anchors", std::move(anchors)},
          {"max_depth", cfg.max_depth},
          {"match_alpha", cfg.match_alpha},
          {"context_factor", cfg.context_factor},
          {"depth_penalty", cfg.depth_penalty},
          {"pruning", std::string(to_string(cfg.pruning))},
          {"seed", cfg.seed}};
}

NoiseProfile noise_profile_from_json(const json& j, NoiseProfile p) {
  reject_unknown(j,
                 {"p_miss", "p_mislabel", "p_false_positive", "center_jitter", "size_jitter",
                  "recover_gain", "seed", "admissible", "min_visible"},
                 "noise profile");
  read(j, "p_miss", p.p_miss);
  read(j, "p_mislabel", p.p_mislabel);
  read(j, "p_false_positive", p.p_false_positive);
  read(j, "center_jitter", p.center_jitter);
  read(j, "size_jitter", p.size_jitter);
  read(j, "recover_gain", p.recover_gain);
  read(j, "seed", p.seed);
  read(j, "admissible", p.admissible);
  read(j, "min_visible", p.min_visible);
  p.validate();
  return p;
}

json to_json(const NoiseProfile& p) {
  return {{"p_miss", p.p_miss},
          {"p_mislabel", p.p_mislabel},
          {"p_false_positive", p.p_false_positive},
          {"center_jitter", p.center_jitter},
          {"size_jitter", p.size_jitter},
          {"recover_gain", p.recover_gain},
          {"seed", p.seed},
          {"admissible", p.admissible},
          {"min_visible", p.min_visible}};
}

json to_json(const Box& b) { return {{"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h}}; }

json to_json(const Detection& d) {
  json j = {{"box", to_json(d.box)}, {"class", d.class_id}, {"prob", d.prob}};
  if (d.sub_threshold_score) j["sub_threshold_score"] = *d.sub_threshold_score;
  return j;
}

json to_json(const RefinedAnnotation& a) {
  json j = {{"class", a.class_id},
            {"effective_prob", a.effective_prob},
            {"provenance", std::string(to_string(a.provenance))},
            {"source_click", a.source_click},
            {"depth", a.depth}};
  j["box"] = a.box ? to_json(*a.box) : json(nullptr);
  return j;
}

namespace {

json node_to_json(const ProposalNode& n) {
  json j = {{"region", to_json(n.region)},
            {"depth", n.depth},
            {"anchor_index", n.anchor_index},
            {"priority", n.priority},
            {"pruned", n.pruned},
            {"failed", n.failed}};
  j["outcome"] = n.outcome ? to_json(*n.outcome) : json(nullptr);
  json children = json::array();
  for (const ProposalNode& c : n.children) children.push_back(node_to_json(c));
  j["children"] = std::move(children);
  return j;
}

}  // namespace

json to_json(const HierarchyTrace& t, bool include_tree) {
  json j = {{"root_click", t.root_click},
            {"nodes_generated", t.nodes_generated},
            {"nodes_expanded", t.nodes_expanded},
            {"nodes_pruned", t.nodes_pruned},
            {"detector_calls", t.detector_calls},
            {"detector_failures", t.detector_failures},
            {"winning_path", t.winning_path},
            {"result", to_json(t.result)}};
  if (include_tree) {
    json tree = json::array();
    for (const ProposalNode& n : t.tree) tree.push_back(node_to_json(n));
    j["tree"] = std::move(tree);
  }
  return j;
}

json to_json(const RefinementStats& s) {
  json j = {{"confirmed", s.confirmed},
            {"relabeled", s.relabeled},
            {"recovered", s.recovered},
            {"unresolved", s.unresolved},
            {"detector_calls", s.detector_calls},
            {"detector_failures", s.detector_failures},
            {"discarded_detections", s.discarded_detections}};
  j["full_image_error"] = s.full_image_error ? json(*s.full_image_error) : json(nullptr);
  return j;
}

json to_json(const RefinementOutcome& o, bool include_trees) {
  json annotations = json::array();
  json boxes = json::array();
  for (const RefinedAnnotation& a : o.annotations) {
    annotations.push_back(to_json(a));
    if (a.box) boxes.push_back(to_json(a));
  }
  json traces = json::array();
  for (const HierarchyTrace& t : o.traces) traces.push_back(to_json(t, include_trees));
  return {{"annotations", std::move(annotations)},
          {"boxes", std::move(boxes)},
          {"traces", std::move(traces)},
          {"stats", to_json(o.stats)}};
}

json to_json(const EvalReport& r) {
  json ap = json::object();
  for (const auto& [cls, v] : r.per_class_ap) ap[std::to_string(cls)] = v;
  json counts = json::object();
  for (const auto& [cls, c] : r.counts) {
    counts[std::to_string(cls)] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
  }
  return {{"map", r.map}, {"recall", r.recall}, {"per_class_ap", std::move(ap)}, {"counts", std::move(counts)}};
}

json read_json_file(std::string_view path) {
  std::ifstream in{std::string(path)};
  if (!in) throw std::runtime_error("cannot open " + std::string(path));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string(path) + ": " + e.what());
  }
}

}  // namespace oneclick
