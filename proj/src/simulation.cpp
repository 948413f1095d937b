#include "oneclick/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "oneclick/json_io.hpp"
#include "oneclick/random.hpp"

namespace oneclick {

using nlohmann::json;

ClickModel ClickModel::parse(std::string_view spec) {
  if (spec == "exact") return {};
  constexpr std::string_view prefix = "jitter:";
  if (spec.substr(0, prefix.size()) == prefix) {
    const std::string number(spec.substr(prefix.size()));
    std::size_t used = 0;
    double sigma = 0.0;
    try {
      sigma = std::stod(number, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != number.size() || number.empty() || !(sigma >= 0.0) || !std::isfinite(sigma)) {
      throw std::invalid_argument("click model: sigma must be a non-negative number");
    }
    return {sigma};
  }
  throw std::invalid_argument("click model must be 'exact' or 'jitter:<sigma>'");
}

std::string ClickModel::to_string() const {
  if (jitter == 0.0) return "exact";
  return "jitter:" + json(jitter).dump();
}

std::vector<ClickAnnotation> synthesize_clicks(const GroundTruthImage& gt, const ClickModel& model,
                                               std::uint64_t seed) {
  constexpr std::uint64_t kClickTag = 0xc1c1c1c1ULL;
  std::vector<ClickAnnotation> clicks;
  clicks.reserve(gt.objects.size());
  const std::uint64_t image_key = hash_combine(hash_combine(seed, kClickTag), fnv1a64(gt.image.id));
  for (std::size_t i = 0; i < gt.objects.size(); ++i) {
    const Box& b = gt.objects[i].box;
    ClickAnnotation c{b.cx, b.cy, gt.objects[i].class_id, static_cast<int>(i)};
    if (model.jitter > 0.0) {
      KeyedRng rng(hash_combine(image_key, i));
      const double sigma = model.jitter * std::sqrt(b.w * b.h);
      c.x = std::clamp(rng.normal(b.cx, sigma), 0.0, static_cast<double>(gt.image.width));
      c.y = std::clamp(rng.normal(b.cy, sigma), 0.0, static_cast<double>(gt.image.height));
    }
    clicks.push_back(c);
  }
  return clicks;
}

namespace {

struct ImageResult {
  std::vector<Prediction> raw;
  std::vector<RefinedAnnotation> refined;
  RefinementStats stats;
  int clicks = 0;
};

void accumulate(RefinementStats& total, const RefinementStats& s) {
  total.confirmed += s.confirmed;
  total.relabeled += s.relabeled;
  total.recovered += s.recovered;
  total.unresolved += s.unresolved;
  total.detector_calls += s.detector_calls;
  total.detector_failures += s.detector_failures;
  total.discarded_detections += s.discarded_detections;
}

}  // namespace

SimulationReport simulate(std::span<const GroundTruthImage> dataset, const SimulationOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  options.engine.validate();
  NoiseProfile noise = options.noise;
  noise.seed = options.seed;
  noise.validate();

  // Report order is by image id regardless of directory order.
  std::vector<const GroundTruthImage*> images;
  for (const GroundTruthImage& gt : dataset) images.push_back(&gt);
  std::stable_sort(images.begin(), images.end(),
                   [](const auto* a, const auto* b) { return a->image.id < b->image.id; });

  std::vector<ImageResult> results(images.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < images.size(); i = next++) {
      try {
        const GroundTruthImage& gt = *images[i];
        const SimulatedDetector detector(gt, noise);
        const std::vector<ClickAnnotation> clicks = synthesize_clicks(gt, options.clicks, options.seed);
        RefinementOutcome outcome = refine_image(gt.image, clicks, detector, options.engine);
        results[i].raw = predictions_from(outcome.raw_detections);
        results[i].refined = std::move(outcome.annotations);
        results[i].stats = outcome.stats;
        results[i].clicks = static_cast<int>(clicks.size());
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  unsigned n_workers = options.workers > 0 ? static_cast<unsigned>(options.workers)
                                           : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(std::max<std::size_t>(images.size(), 1)));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<GroundTruthImage> truth;
  std::vector<std::vector<Prediction>> raw;
  std::vector<std::vector<RefinedAnnotation>> refined;
  SimulationReport report;
  for (std::size_t i = 0; i < images.size(); ++i) {
    truth.push_back(*images[i]);
    raw.push_back(std::move(results[i].raw));
    refined.push_back(std::move(results[i].refined));
    accumulate(report.totals, results[i].stats);
    report.clicks_total += results[i].clicks;
  }
  report.images = static_cast<int>(images.size());
  report.detector_calls = report.totals.detector_calls;
  report.raw = evaluate(std::span<const std::vector<Prediction>>(raw), truth);
  report.refined = evaluate(std::span<const std::vector<RefinedAnnotation>>(refined), truth);
  if (options.timing) {
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  return report;
}

json to_json(const SimulationReport& r, const SimulationOptions& options) {
  NoiseProfile noise = options.noise;
  noise.seed = options.seed;
  json j = {{"raw", to_json(r.raw)},
            {"refined", to_json(r.refined)},
            {"images", r.images},
            {"clicks_total", r.clicks_total},
            {"detector_calls", r.detector_calls},
            {"provenance",
             {{"confirmed", r.totals.confirmed},
              {"relabeled", r.totals.relabeled},
              {"recovered", r.totals.recovered},
              {"unresolved", r.totals.unresolved}}},
            {"config",
             {{"clicks", options.clicks.to_string()},
              {"engine", to_json(options.engine)},
              {"noise", to_json(noise)},
              {"seed", options.seed}}}};
  if (r.wall_ms) j["wall_ms"] = *r.wall_ms;
  return j;
}

SweepParam sweep_param_from_string(std::string_view s) {
  if (s == "anchors") return SweepParam::Anchors;
  if (s == "depth") return SweepParam::Depth;
  throw std::invalid_argument("sweep parameter must be 'anchors' or 'depth'");
}

namespace {

SimulationOptions with_value(const SimulationOptions& base, SweepParam param, int value) {
  SimulationOptions o = base;
  if (param == SweepParam::Anchors) {
    o.engine.anchors = default_anchors(value);
  } else {
    o.engine.max_depth = value;
  }
  return o;
}

}  // namespace

std::vector<SweepRow> sweep(std::span<const GroundTruthImage> dataset, const SimulationOptions& base,
                            SweepParam param, std::span<const int> values) {
  if (values.empty()) throw std::invalid_argument("sweep: at least one value required");
  std::vector<SweepRow> rows;
  for (int v : values) rows.push_back({v, simulate(dataset, with_value(base, param, v))});
  return rows;
}

json sweep_to_json(SweepParam param, std::span<const SweepRow> rows, const SimulationOptions& base) {
  json table = json::array();
  for (const SweepRow& row : rows) {
    table.push_back({{"value", row.value}, {"report", to_json(row.report, with_value(base, param, row.value))}});
  }
  return {{"param", param == SweepParam::Anchors ? "anchors" : "depth"}, {"rows", std::move(table)}};
}

}  // namespace oneclick
