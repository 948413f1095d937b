#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oneclick/types.hpp"

namespace oneclick {

/// Dense class-id -> name table. Ids are assigned in insertion order.
class LabelTable {
 public:
  LabelTable() = default;
  explicit LabelTable(std::vector<std::string> names);

  /// Returns the id for `name`, appending it when unknown.
  ClassId intern(std::string_view name);
  std::optional<ClassId> find(std::string_view name) const;
  const std::string& name(ClassId id) const;
  bool contains(ClassId id) const noexcept { return id >= 0 && static_cast<std::size_t>(id) < names_.size(); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool operator==(const LabelTable&) const = default;

 private:
  std::vector<std::string> names_;
};

struct GroundTruthObject {
  ClassId class_id;
  Box box;

  bool operator==(const GroundTruthObject&) const = default;
};

struct GroundTruthImage {
  ImageRef image;
  std::vector<GroundTruthObject> objects;
  LabelTable labels;

  /// Every box inside the image and every class in the label table.
  void validate() const;
};

/// Thrown for unreadable annotation documents. `element()` names the XML
/// element or JSON field at fault.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string element, const std::string& message)
      : std::runtime_error(element + ": " + message), element_(std::move(element)) {}
  const std::string& element() const noexcept { return element_; }

 private:
  std::string element_;
};

/// Parses a VOC annotation. Corners are 1-based inclusive pixel indices:
/// w = xmax - xmin + 1, cx = (xmin - 1 + xmax) / 2. Unknown class names are
/// appended to `labels`, which becomes the returned image's table.
GroundTruthImage parse_voc_xml(std::string_view document, LabelTable labels = {});

/// Native ground-truth JSON:
/// {"image":{"id","width","height","uri"},"labels":[names],"objects":[{"class","cx","cy","w","h"}]}
GroundTruthImage parse_ground_truth_json(std::string_view document);
std::string ground_truth_to_json(const GroundTruthImage& gt);

/// Canonical annotation JSON: sorted keys, 4-decimal fixed coordinates,
/// Unresolved entries omitted. Byte-identical for identical inputs.
std::string export_annotations(std::span<const RefinedAnnotation> results, const ImageRef& image);

struct AnnotationDocument {
  std::string image_id;
  std::vector<RefinedAnnotation> boxes;
};
AnnotationDocument parse_annotations(std::string_view document);

LabelTable parse_label_table(std::string_view document);
std::string label_table_to_json(const LabelTable& labels);

/// Loads every *.json / *.xml ground-truth file in `dir` (sorted by file
/// name). An optional labels.json fixes the class order; VOC files share one
/// table so ids agree across the corpus.
std::vector<GroundTruthImage> load_dataset(const std::filesystem::path& dir);

struct SyntheticCorpusSpec {
  int images = 50;
  int min_objects = 3;
  int max_objects = 12;
  int classes = 5;
  int min_width = 320;
  int max_width = 640;
  int min_height = 240;
  int max_height = 480;
  double min_size_frac = 0.06;
  double max_size_frac = 0.30;
  std::uint64_t seed = 1;
};

/// Random scenes with well-separated objects (no object's center inside
/// another object's box, pairwise IoU below 0.2).
std::vector<GroundTruthImage> synthesize_corpus(const SyntheticCorpusSpec& spec);

void write_dataset(const std::filesystem::path& dir, std::span<const GroundTruthImage> images);

}  // namespace oneclick
