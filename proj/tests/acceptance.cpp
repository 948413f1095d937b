// Acceptance suite. Prints one [PASS]/[FAIL] line per criterion and exits
// non-zero if any fails.
//
//   acceptance PATH_TO_ONECLICK_CLI

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oneclick/eval.hpp"
#include "oneclick/simulation.hpp"
#include "properties.hpp"
#include "support.hpp"
#include "trials.hpp"

using namespace oneclick;

namespace {

// Pinned tolerances and sizes.
constexpr int kPerfectImages = 50;
constexpr double kPerfectSeconds = 5.0;
constexpr double kFpRate = 2.0;
constexpr double kFpRefinedMin = 0.99;
constexpr double kFpRawMax = 0.8;
constexpr double kFpGapMin = 0.15;
constexpr int kRecoveryImages = 200;
constexpr double kRecoveryGapMin = 0.25;
constexpr double kRecoverySeconds = 60.0;
constexpr int kPruningRuns = 1000;
constexpr double kPruningFewerMin = 0.30;
constexpr int kTrendImages = 100;
constexpr int kMatchInstances = 1000;
constexpr double kApExpected = 0.5;
constexpr double kApTolerance = 1e-9;
constexpr int kVocFiles = 20;

struct Line {
  bool pass;
  std::string name;
  std::string detail;
};

std::vector<Line> lines;

void report(bool pass, const std::string& name, const std::string& detail) {
  lines.push_back({pass, name, detail});
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << std::endl;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<GroundTruthImage> corpus(int images, int min_objects, int max_objects, std::uint64_t seed) {
  SyntheticCorpusSpec spec;
  spec.images = images;
  spec.min_objects = min_objects;
  spec.max_objects = max_objects;
  spec.seed = seed;
  return synthesize_corpus(spec);
}

void perfect_chain() {
  const auto data = corpus(kPerfectImages, 3, 12, 101);
  SimulationOptions opt;
  const auto t0 = std::chrono::steady_clock::now();
  const SimulationReport r = simulate(data, opt);
  const double secs = seconds_since(t0);
  report(r.refined.map == 1.0 && r.refined.recall == 1.0 && secs < kPerfectSeconds, "perfect chain",
         fmt("%d images, refined mAP %.6f, recall %.6f, %.2f s (limit %.0f s)", r.images, r.refined.map,
             r.refined.recall, secs, kPerfectSeconds));
}

void fp_filtering() {
  // VOC-like scene density (1-4 objects per image).
  const auto data = corpus(200, 1, 4, 202);
  SimulationOptions opt;
  opt.noise.p_false_positive = kFpRate;
  opt.seed = 7;
  const SimulationReport r = simulate(data, opt);
  const double gap = r.refined.map - r.raw.map;
  report(r.refined.map >= kFpRefinedMin && r.raw.map < kFpRawMax && gap >= kFpGapMin, "false-positive filtering",
         fmt("p_fp %.1f: refined mAP %.4f (>= %.2f), raw mAP %.4f (< %.2f), gap %.4f (>= %.2f)", kFpRate,
             r.refined.map, kFpRefinedMin, r.raw.map, kFpRawMax, gap, kFpGapMin));
}

void recall_recovery() {
  const auto data = corpus(kRecoveryImages, 3, 12, 303);
  SimulationOptions opt;
  opt.noise.p_miss = 0.4;
  opt.noise.recover_gain = 1.6;
  opt.engine.anchors = default_anchors(5);
  opt.engine.max_depth = 3;
  opt.seed = 11;
  const auto t0 = std::chrono::steady_clock::now();
  const SimulationReport r = simulate(data, opt);
  const double secs = seconds_since(t0);
  const double gap = r.refined.recall - r.raw.recall;
  report(gap >= kRecoveryGapMin && secs < kRecoverySeconds, "recall recovery",
         fmt("raw recall %.4f, refined recall %.4f, gap %.4f (>= %.2f), %.2f s (limit %.0f s)", r.raw.recall,
             r.refined.recall, gap, kRecoveryGapMin, secs, kRecoverySeconds));
}

void pruning_equivalence() {
  int mismatches = 0, fewer = 0, more = 0;
  for (int s = 0; s < kPruningRuns; ++s) {
    const auto t = testing::run_pruning_trial(static_cast<std::uint64_t>(s));
    mismatches += !testing::same_annotation(t.exhaustive.annotation, t.best_first.annotation);
    fewer += t.best_first.trace.detector_calls < t.exhaustive.trace.detector_calls;
    more += t.best_first.trace.detector_calls > t.exhaustive.trace.detector_calls;
  }
  const double share = static_cast<double>(fewer) / kPruningRuns;
  report(mismatches == 0 && more == 0 && share >= kPruningFewerMin, "pruning oracle equivalence",
         fmt("%d runs, %d mismatches, fewer calls in %.1f%% (>= %.0f%%), more calls in %d", kPruningRuns, mismatches,
             100 * share, 100 * kPruningFewerMin, more));
}

void monotonic_trends() {
  const auto data = corpus(kTrendImages, 3, 12, 404);
  SimulationOptions base;
  base.noise.p_miss = 0.6;
  base.noise.recover_gain = 1.25;
  base.noise.p_false_positive = 0.5;
  base.engine.pruning = PruningMode::Exhaustive;
  base.seed = 13;

  auto check = [&](SweepParam param, const std::vector<int>& values, const char* label) {
    const auto rows = sweep(data, base, param, values);
    bool ok = true;
    std::string detail = label;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail += fmt(" %d:(recall %.4f, calls %lld)", rows[i].value, rows[i].report.refined.recall,
                    rows[i].report.detector_calls);
      if (i > 0) {
        ok = ok && rows[i].report.refined.recall >= rows[i - 1].report.refined.recall &&
             rows[i].report.detector_calls >= rows[i - 1].report.detector_calls;
      }
    }
    return std::make_pair(ok, detail);
  };
  const auto k = check(SweepParam::Anchors, {3, 5, 7}, "K");
  const auto t = check(SweepParam::Depth, {2, 3, 4, 5}, "T");
  report(k.first && t.first, "monotonic trends", k.second + "; " + t.second);
}

void matching_properties() {
  std::mt19937_64 rng(555);
  int one_to_one = 0, monotone = 0, translation = 0, separated = 0;
  for (int i = 0; i < kMatchInstances; ++i) {
    const auto inst = testing::random_match_instance(rng);
    one_to_one += !testing::one_to_one_holds(inst);
    monotone += !testing::threshold_monotone_holds(inst);
    translation += !testing::translation_equivariant_holds(inst, rng);
    separated += !testing::well_separated_agrees(rng, 6);
  }
  report(one_to_one + monotone + translation + separated == 0, "matching properties",
         fmt("%d instances each; violations: one-to-one %d, threshold monotonicity %d, translation %d, "
             "brute-force equivalence %d",
             kMatchInstances, one_to_one, monotone, translation, separated));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void cli_determinism(const std::string& cli) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::current_path() / "acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "noise.json") << R"({"p_miss":0.3,"p_mislabel":0.1,"p_false_positive":1.0,"center_jitter":0.05})";
  const std::string q = "\"";
  const std::string gen = q + cli + q + " generate --out " + q + (dir / "data").string() + q +
                          " --images 30 --seed 5 2>/dev/null";
  auto run = [&](const std::string& out) {
    return q + cli + q + " simulate --dataset " + q + (dir / "data").string() + q + " --clicks jitter:0.02 --noise " +
           q + (dir / "noise.json").string() + q + " --seed 42 --out " + q + (dir / out).string() + q;
  };
  const int rc = std::system(gen.c_str()) | std::system(run("a.json").c_str()) | std::system(run("b.json").c_str());
  const std::string a = slurp(dir / "a.json"), b = slurp(dir / "b.json");
  report(rc == 0 && !a.empty() && a == b, "CLI determinism",
         fmt("exit codes %s, report sizes %zu/%zu bytes, identical: %s", rc == 0 ? "0" : "non-zero", a.size(), b.size(),
             a == b ? "yes" : "no"));
}

void eval_correctness() {
  // AP example: two ground-truth boxes, a hit at 0.9 and a miss at 0.8.
  const GroundTruthImage gt{ImageRef("ap", 1000, 1000), {{0, Box(100, 100, 40, 40)}, {0, Box(500, 500, 40, 40)}},
                            LabelTable({"a"})};
  const std::vector<std::vector<Prediction>> preds{{{Box(100, 100, 40, 40), 0, 0.9}, {Box(800, 100, 40, 40), 0, 0.8}}};
  const std::vector<GroundTruthImage> truth{gt};
  const EvalReport r = evaluate(std::span<const std::vector<Prediction>>(preds), truth);
  const double ap_err = std::abs(r.map - kApExpected);

  std::mt19937_64 rng(808);
  int mismatched = 0, boxes = 0;
  for (int f = 0; f < kVocFiles; ++f) {
    std::uniform_int_distribution<int> dim(40, 800);
    const int w = dim(rng), h = dim(rng);
    std::string xml = "<annotation><filename>f" + std::to_string(f) + ".jpg</filename><size><width>" +
                      std::to_string(w) + "</width><height>" + std::to_string(h) + "</height></size>";
    std::vector<std::array<int, 4>> corners;
    for (int k = 0; k < 5; ++k) {
      std::uniform_int_distribution<int> xs(1, w), ys(1, h);
      int x1 = xs(rng), x2 = xs(rng), y1 = ys(rng), y2 = ys(rng);
      if (x1 == x2 || y1 == y2) continue;
      if (x1 > x2) std::swap(x1, x2);
      if (y1 > y2) std::swap(y1, y2);
      corners.push_back({x1, y1, x2, y2});
      xml += "<object><name>obj</name><bndbox><xmin>" + std::to_string(x1) + "</xmin><ymin>" + std::to_string(y1) +
             "</ymin><xmax>" + std::to_string(x2) + "</xmax><ymax>" + std::to_string(y2) + "</ymax></bndbox></object>";
    }
    xml += "</annotation>";
    const GroundTruthImage parsed = parse_voc_xml(xml);
    for (std::size_t i = 0; i < corners.size(); ++i) {
      ++boxes;
      const auto& c = corners[i];
      mismatched += i >= parsed.objects.size() ||
                    !(parsed.objects[i].box == testing::voc_pixels_to_box(c[0], c[1], c[2], c[3]));
    }
  }
  report(ap_err <= kApTolerance && mismatched == 0, "eval correctness",
         fmt("AP %.12f (expected %.1f, tolerance %.0e); VOC conversion: %d files, %d boxes, %d mismatches", r.map,
             kApExpected, kApTolerance, kVocFiles, boxes, mismatched));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " PATH_TO_ONECLICK_CLI\n";
    return 2;
  }
  const std::vector<std::function<void()>> criteria{
      perfect_chain,       fp_filtering, recall_recovery,
      pruning_equivalence, monotonic_trends, matching_properties,
      [&] { cli_determinism(argv[1]); }, eval_correctness};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      report(false, "criterion aborted", e.what());
    }
  }
  int failed = 0;
  for (const Line& l : lines) failed += !l.pass;
  std::cout << (lines.size() - failed) << "/" << lines.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
