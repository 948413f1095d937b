#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oneclick/eval.hpp"
#include "support.hpp"

using namespace oneclick;

namespace {

GroundTruthImage scene(std::vector<GroundTruthObject> objects, int classes = 3) {
  std::vector<std::string> names;
  for (int c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
  return GroundTruthImage{ImageRef("img", 1000, 1000), std::move(objects), LabelTable(names)};
}

EvalReport eval1(const std::vector<Prediction>& preds, const GroundTruthImage& gt, double thr = 0.5) {
  const std::vector<std::vector<Prediction>> p{preds};
  const std::vector<GroundTruthImage> t{gt};
  return evaluate(std::span<const std::vector<Prediction>>(p), t, thr);
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("perfect and empty predictors") {
  const GroundTruthImage gt = scene({{0, Box(100, 100, 40, 40)}, {1, Box(300, 300, 50, 20)}, {0, Box(600, 600, 30, 30)}});
  std::vector<Prediction> perfect;
  for (const auto& o : gt.objects) perfect.push_back({o.box, o.class_id, 0.9});
  const EvalReport r = eval1(perfect, gt);
  CHECK(r.map == 1.0);
  CHECK(r.recall == 1.0);

  const EvalReport e = eval1({}, gt);
  CHECK(e.map == 0.0);
  CHECK(e.recall == 0.0);
  CHECK(e.counts.at(0).fn == 2);
  CHECK(e.counts.at(1).fn == 1);
}

TEST_CASE("hand-computed precision-recall example gives AP one half") {
  const GroundTruthImage gt = scene({{0, Box(100, 100, 40, 40)}, {0, Box(500, 500, 40, 40)}}, 1);
  const std::vector<Prediction> preds{{Box(100, 100, 40, 40), 0, 0.9}, {Box(800, 100, 40, 40), 0, 0.8}};
  const EvalReport r = eval1(preds, gt);
  // Precision 1/1 at recall 1/2, then 1/2 at recall 1/2: area 0.5 * 1.
  CHECK(std::abs(r.per_class_ap.at(0) - 0.5) <= 1e-9);
  CHECK(std::abs(r.map - 0.5) <= 1e-9);
  CHECK(std::abs(r.recall - 0.5) <= 1e-9);
  CHECK(r.counts.at(0) == ClassCounts{1, 1, 1});
  CHECK(std::abs(testing::reference_ap({true, false}, 2) - 0.5) <= 1e-9);
}

TEST_CASE("threshold and argument validation") {
  const GroundTruthImage gt = scene({});
  CHECK_THROWS_AS(eval1({}, gt, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(eval1({}, gt, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(eval1({}, gt, -0.2), std::invalid_argument);
  const std::vector<std::vector<Prediction>> two(2);
  const std::vector<GroundTruthImage> one{gt};
  CHECK_THROWS_AS(evaluate(std::span<const std::vector<Prediction>>(two), one), std::invalid_argument);
}

TEST_CASE("IoU threshold is inclusive and wrong classes never match") {
  const GroundTruthImage gt = scene({{0, Box(20, 10, 20, 20)}});
  // The top half of the object: IoU = 200 / 400 exactly.
  const EvalReport at = eval1({{Box(20, 5, 20, 10), 0, 0.9}}, gt);
  CHECK(at.recall == 1.0);
  const EvalReport below = eval1({{Box(20, 5, 20, 9.99), 0, 0.9}}, gt, 0.5);
  CHECK(below.recall == 0.0);
  const EvalReport wrong = eval1({{Box(20, 10, 20, 20), 1, 0.9}}, gt);
  CHECK(wrong.recall == 0.0);
  CHECK(wrong.counts.at(1).fp == 1);
  // A class without ground truth stays out of the mean.
  CHECK(wrong.per_class_ap.count(1) == 0);
  CHECK(wrong.map == 0.0);
}

TEST_CASE("duplicates count as false positives") {
  const GroundTruthImage gt = scene({{0, Box(100, 100, 40, 40)}});
  const EvalReport r = eval1({{Box(100, 100, 40, 40), 0, 0.9}, {Box(101, 100, 40, 40), 0, 0.95}}, gt);
  CHECK(r.counts.at(0) == ClassCounts{1, 1, 0});
  CHECK(r.per_class_ap.at(0) == doctest::Approx(1.0));
}

TEST_CASE("AP agrees with the reference formula on constructed rankings") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<GroundTruthObject> objects;
    std::vector<Prediction> preds;
    const int n_gt = 1 + static_cast<int>(rng() % 8);
    for (int g = 0; g < n_gt; ++g) objects.push_back({0, Box(50 + 100 * g, 100, 40, 40)});
    // Each prediction is an exact copy of a distinct object or lies far away.
    std::vector<std::pair<double, bool>> ranked;
    for (int g = 0; g < n_gt; ++g) {
      if (unit(rng) < 0.7) {
        const double s = unit(rng);
        preds.push_back({objects[static_cast<std::size_t>(g)].box, 0, s});
        ranked.push_back({s, true});
      }
    }
    const int n_fp = static_cast<int>(rng() % 5);
    for (int f = 0; f < n_fp; ++f) {
      const double s = unit(rng);
      preds.push_back({Box(50 + 100 * f, 800, 40, 40), 0, s});
      ranked.push_back({s, false});
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<bool> hits;
    for (const auto& r : ranked) hits.push_back(r.second);

    const EvalReport r = eval1(preds, scene(objects, 1));
    CHECK(std::abs(r.map - testing::reference_ap(hits, n_gt)) <= 1e-9);

    // Permuting inputs changes nothing.
    std::shuffle(preds.begin(), preds.end(), rng);
    CHECK(eval1(preds, scene(objects, 1)) == r);

    // A false positive ranked below every true positive never raises AP.
    preds.push_back({Box(900, 900, 40, 40), 0, 1e-6});
    const EvalReport lower = eval1(preds, scene(objects, 1));
    CHECK(lower.map <= r.map + 1e-12);
    CHECK(lower.map >= 0.0);
    CHECK(lower.recall <= 1.0);
  }
}

TEST_CASE("multi-image evaluation and refined-annotation overload") {
  const std::vector<GroundTruthImage> truth{scene({{0, Box(100, 100, 40, 40)}}), scene({{1, Box(200, 200, 40, 40)}})};
  RefinedAnnotation a;
  a.box = Box(100, 100, 40, 40);
  a.class_id = 0;
  a.effective_prob = 0.8;
  a.provenance = Provenance::Confirmed;
  const std::vector<std::vector<RefinedAnnotation>> preds{{a}, {RefinedAnnotation::unresolved({200, 200, 1, 0})}};
  const EvalReport r = evaluate(std::span<const std::vector<RefinedAnnotation>>(preds), truth);
  CHECK(r.per_class_ap.at(0) == 1.0);
  CHECK(r.per_class_ap.at(1) == 0.0);
  CHECK(r.map == doctest::Approx(0.5));
  CHECK(r.recall == doctest::Approx(0.5));
  // A box in image 0 cannot claim ground truth in image 1.
  const std::vector<std::vector<Prediction>> crossed{{{Box(200, 200, 40, 40), 1, 0.9}}, {}};
  const EvalReport c = evaluate(std::span<const std::vector<Prediction>>(crossed), truth);
  CHECK(c.recall == 0.0);
}

}  // TEST_SUITE
