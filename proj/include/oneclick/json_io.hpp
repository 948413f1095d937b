#pragma once

#include <string_view>

#include <json.hpp>

#include "oneclick/config.hpp"
#include "oneclick/detector.hpp"
#include "oneclick/engine.hpp"
#include "oneclick/eval.hpp"

namespace oneclick {

/// Applies the keys present in `j` on top of `base`. Recognised keys:
/// anchors ([[w,h],...]), k (default anchor count), max_depth, match_alpha,
/// context_factor, depth_penalty, pruning, seed. Unknown keys are rejected.
EngineConfig engine_config_from_json(const nlohmann::json& j, EngineConfig base = {});
nlohmann::json to_json(const EngineConfig& cfg);

NoiseProfile noise_profile_from_json(const nlohmann::json& j, NoiseProfile base = {});
nlohmann::json to_json(const NoiseProfile& p);

nlohmann::json to_json(const Box& b);
nlohmann::json to_json(const Detection& d);
nlohmann::json to_json(const RefinedAnnotation& a);
nlohmann::json to_json(const HierarchyTrace& t, bool include_tree = false);
nlohmann::json to_json(const RefinementStats& s);
nlohmann::json to_json(const RefinementOutcome& o, bool include_trees = false);
nlohmann::json to_json(const EvalReport& r);

/// Reads a JSON file; throws std::runtime_error naming the path on failure.
nlohmann::json read_json_file(std::string_view path);

}  // namespace oneclick
