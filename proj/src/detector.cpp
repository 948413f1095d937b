#include "oneclick/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oneclick/random.hpp"

namespace oneclick {

namespace {

constexpr std::uint64_t kFalsePositiveTag = 0xf9f9f9f900000000ULL;
constexpr std::uint64_t kBackgroundTag = 0xb6b6b6b600000000ULL;
// False positives take object-like extents relative to the queried region.
constexpr double kFalsePositiveMinFrac = 0.06;
constexpr double kFalsePositiveMaxFrac = 0.30;

std::uint64_t quantize(double v) {
  return static_cast<std::uint64_t>(std::llround(v * 1000.0));
}

std::uint64_t region_key(const NoiseProfile& p, const ImageRef& image, const Box& region) {
  std::uint64_t k = hash_combine(p.seed, fnv1a64(image.id));
  k = hash_combine(k, quantize(region.cx));
  k = hash_combine(k, quantize(region.cy));
  k = hash_combine(k, quantize(region.w));
  return hash_combine(k, quantize(region.h));
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void NoiseProfile::validate() const {
  if (!probability(p_miss)) throw std::invalid_argument("p_miss: must be in [0, 1]");
  if (!probability(p_mislabel)) throw std::invalid_argument("p_mislabel: must be in [0, 1]");
  if (!(p_false_positive >= 0.0) || !std::isfinite(p_false_positive)) {
    throw std::invalid_argument("p_false_positive: must be >= 0");
  }
  if (!(center_jitter >= 0.0)) throw std::invalid_argument("center_jitter: must be >= 0");
  if (!(size_jitter >= 0.0)) throw std::invalid_argument("size_jitter: must be >= 0");
  if (!(recover_gain >= 1.0) || !std::isfinite(recover_gain)) {
    throw std::invalid_argument("recover_gain: must be >= 1");
  }
  if (!(min_visible > 0.0 && min_visible <= 1.0)) {
    throw std::invalid_argument("min_visible: must be in (0, 1]");
  }
}

double NoiseProfile::emission_rate(int depth) const noexcept {
  return std::min(1.0, (1.0 - p_miss) * std::pow(recover_gain, depth));
}

DetectorOutput sim_detect(const GroundTruthImage& truth, const Crop& crop, const NoiseProfile& profile) {
  const Box& region = crop.region;
  const std::uint64_t key = region_key(profile, truth.image, region);
  const int classes = static_cast<int>(std::max<std::size_t>(truth.labels.size(), 1));
  const double rate = profile.emission_rate(crop.depth);

  DetectorOutput out;
  std::optional<double> suppressed;

  for (std::size_t i = 0; i < truth.objects.size(); ++i) {
    const GroundTruthObject& obj = truth.objects[i];
    if (!region.contains(obj.box.cx, obj.box.cy)) continue;

    // Fixed draw order so every object's fate is independent of the others.
    KeyedRng rng(hash_combine(key, i));
    const double u_emit = rng.uniform();
    const double u_mislabel = rng.uniform();
    const std::uint64_t class_draw = rng.next();
    const double prob = rng.uniform(0.5, 1.0);
    const double dx = rng.normal(0.0, profile.center_jitter * obj.box.w);
    const double dy = rng.normal(0.0, profile.center_jitter * obj.box.h);
    const double sw = rng.normal(0.0, profile.size_jitter);
    const double sh = rng.normal(0.0, profile.size_jitter);
    const double sub_score = rng.uniform(0.1, 0.45);

    Box visible = obj.box;
    const bool overlaps = intersect(obj.box, region, &visible);
    const double visible_frac = overlaps ? visible.area() / obj.box.area() : 0.0;

    if (visible_frac + 1e-12 < profile.min_visible || u_emit >= rate) {
      suppressed = std::max(suppressed.value_or(0.0), sub_score);
      continue;
    }

    const double w = obj.box.w * std::max(0.05, 1.0 + sw);
    const double h = obj.box.h * std::max(0.05, 1.0 + sh);
    Box emitted(obj.box.cx + dx, obj.box.cy + dy, w, h);
    if (!region.contains(emitted)) {
      Box clipped = emitted;
      if (!intersect(emitted, region, &clipped)) {
        suppressed = std::max(suppressed.value_or(0.0), sub_score);
        continue;
      }
      emitted = clipped;
    }

    ClassId cls = obj.class_id;
    if (classes > 1 && u_mislabel < profile.p_mislabel) {
      const int offset = 1 + static_cast<int>(class_draw % static_cast<std::uint64_t>(classes - 1));
      cls = (obj.class_id + offset) % classes;
    }
    out.detections.emplace_back(emitted, cls, prob);
  }

  const double area_ratio = region.area() / truth.image.frame().area();
  KeyedRng fp_count(hash_combine(key, kFalsePositiveTag));
  const int n_fp = fp_count.poisson(profile.p_false_positive * area_ratio);
  for (int k = 0; k < n_fp; ++k) {
    KeyedRng rng(hash_combine(key, kFalsePositiveTag + 1 + static_cast<std::uint64_t>(k)));
    const double w = region.w * rng.uniform(kFalsePositiveMinFrac, kFalsePositiveMaxFrac);
    const double h = region.h * rng.uniform(kFalsePositiveMinFrac, kFalsePositiveMaxFrac);
    const Corners r = region.corners();
    const double cx = rng.uniform(r.x1 + w / 2.0, r.x2 - w / 2.0);
    const double cy = rng.uniform(r.y1 + h / 2.0, r.y2 - h / 2.0);
    const int cls = rng.uniform_int(0, classes - 1);
    const double prob = rng.uniform(0.5, 0.9);
    out.detections.emplace_back(Box(cx, cy, w, h), cls, prob);
  }

  if (suppressed) {
    out.sub_threshold_score = suppressed;
  } else if (profile.admissible) {
    KeyedRng rng(hash_combine(key, kBackgroundTag));
    out.sub_threshold_score = rng.uniform(0.01, 0.1);
  }
  return out;
}

SimulatedDetector::SimulatedDetector(GroundTruthImage truth, NoiseProfile profile)
    : truth_(std::move(truth)), profile_(profile) {
  profile_.validate();
}

DetectorOutput SimulatedDetector::detect(const ImageRef& image, const Crop& crop) const {
  if (image.id != truth_.image.id) {
    throw std::invalid_argument("simulated detector for '" + truth_.image.id + "' queried with '" +
                                image.id + "'");
  }
  if (!truth_.image.frame().contains(crop.region, 1e-6)) {
    throw std::invalid_argument("detector region outside the image");
  }
  DetectorOutput out = sim_detect(truth_, crop, profile_);
  for (Detection& d : out.detections) d.box = to_region_local(d.box, crop.region);
  return out;
}

}  // namespace oneclick
