#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "oneclick/config.hpp"
#include "oneclick/dataset.hpp"
#include "oneclick/detector.hpp"
#include "oneclick/engine.hpp"
#include "oneclick/eval.hpp"

namespace oneclick {

/// Synthetic annotator: one click per object at its center, optionally
/// displaced by Gaussian noise with sigma = jitter * sqrt(w * h).
struct ClickModel {
  double jitter = 0.0;

  /// "exact" or "jitter:<sigma>".
  static ClickModel parse(std::string_view spec);
  std::string to_string() const;
};

std::vector<ClickAnnotation> synthesize_clicks(const GroundTruthImage& gt, const ClickModel& model,
                                               std::uint64_t seed);

struct SimulationOptions {
  ClickModel clicks;
  NoiseProfile noise;
  EngineConfig engine;
  std::uint64_t seed = 0;  // drives both the noise profile and click jitter
  int workers = 0;         // 0: hardware concurrency
  bool timing = false;     // record wall_ms (makes reports run-dependent)
};

struct SimulationReport {
  EvalReport raw;
  EvalReport refined;
  int images = 0;
  int clicks_total = 0;
  long long detector_calls = 0;
  RefinementStats totals;
  std::optional<double> wall_ms;
};

SimulationReport simulate(std::span<const GroundTruthImage> dataset, const SimulationOptions& options);

nlohmann::json to_json(const SimulationReport& r, const SimulationOptions& options);

enum class SweepParam { Anchors, Depth };
SweepParam sweep_param_from_string(std::string_view s);

struct SweepRow {
  int value;
  SimulationReport report;
};

/// One simulate() per value with the swept parameter replaced: anchors uses
/// the first `value` default anchors, depth sets max_depth.
std::vector<SweepRow> sweep(std::span<const GroundTruthImage> dataset, const SimulationOptions& base,
                            SweepParam param, std::span<const int> values);

nlohmann::json sweep_to_json(SweepParam param, std::span<const SweepRow> rows,
                             const SimulationOptions& base);

}  // namespace oneclick
