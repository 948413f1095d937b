#include "oneclick/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "oneclick/random.hpp"

namespace oneclick {

namespace pt = boost::property_tree;
using nlohmann::json;

LabelTable::LabelTable(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw std::invalid_argument("duplicate label '" + names_[i] + "'");
    }
  }
}

ClassId LabelTable::intern(std::string_view name) {
  if (auto id = find(name)) return *id;
  names_.emplace_back(name);
  return static_cast<ClassId>(names_.size() - 1);
}

std::optional<ClassId> LabelTable::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<ClassId>(it - names_.begin());
}

const std::string& LabelTable::name(ClassId id) const {
  if (!contains(id)) throw std::out_of_range("unknown class id " + std::to_string(id));
  return names_[static_cast<std::size_t>(id)];
}

void GroundTruthImage::validate() const {
  const Box frame = image.frame();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (!labels.contains(objects[i].class_id)) {
      throw ParseError("objects[" + std::to_string(i) + "]",
                       "class " + std::to_string(objects[i].class_id) + " not in label table");
    }
    if (!frame.contains(objects[i].box)) {
      throw ParseError("objects[" + std::to_string(i) + "]", "box lies outside the image");
    }
  }
}

// --- VOC XML ---------------------------------------------------------------

namespace {

double voc_number(const pt::ptree& node, const std::string& path, const std::string& element) {
  auto child = node.get_child_optional(path);
  if (!child) throw ParseError(element, "missing <" + path + ">");
  const std::string text = child->get_value<std::string>();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == 0 || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(element + "/" + path, "not a number: '" + text + "'");
  }
}

std::string strip_extension(const std::string& file) {
  const auto dot = file.find_last_of('.');
  return dot == std::string::npos ? file : file.substr(0, dot);
}

}  // namespace

GroundTruthImage parse_voc_xml(std::string_view document, LabelTable labels) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("annotation", std::string("malformed XML: ") + e.message());
  }
  auto root = tree.get_child_optional("annotation");
  if (!root) throw ParseError("annotation", "missing root element");

  auto size = root->get_child_optional("size");
  if (!size) throw ParseError("size", "missing <size> element");
  const double width = voc_number(*size, "width", "size");
  const double height = voc_number(*size, "height", "size");
  if (width < 1 || height < 1 || width != std::floor(width) || height != std::floor(height)) {
    throw ParseError("size", "width/height must be positive integers");
  }

  const std::string filename = root->get("filename", std::string{});
  std::string id = strip_extension(filename);
  if (id.empty()) id = "image";
  ImageRef image(id, static_cast<int>(width), static_cast<int>(height), filename);

  std::vector<GroundTruthObject> objects;
  int index = 0;
  for (const auto& [tag, node] : *root) {
    if (tag != "object") continue;
    const std::string element = "object[" + std::to_string(index++) + "]";
    const std::string name = node.get("name", std::string{});
    if (name.empty()) throw ParseError(element + "/name", "missing class name");
    auto bnd = node.get_child_optional("bndbox");
    if (!bnd) throw ParseError(element + "/bndbox", "missing <bndbox>");
    const std::string bel = element + "/bndbox";
    const double xmin = voc_number(*bnd, "xmin", bel);
    const double ymin = voc_number(*bnd, "ymin", bel);
    const double xmax = voc_number(*bnd, "xmax", bel);
    const double ymax = voc_number(*bnd, "ymax", bel);
    if (xmax <= xmin) throw ParseError(bel, "xmax must exceed xmin");
    if (ymax <= ymin) throw ParseError(bel, "ymax must exceed ymin");
    if (xmin < 1 || ymin < 1 || xmax > width || ymax > height) {
      throw ParseError(bel, "box lies outside the image");
    }
    // 1-based inclusive pixel indices: pixel i covers [i - 1, i].
    const Box box = Box::from_corners(xmin - 1.0, ymin - 1.0, xmax, ymax);
    objects.push_back({labels.intern(name), box});
  }

  GroundTruthImage gt{std::move(image), std::move(objects), std::move(labels)};
  gt.validate();
  return gt;
}

// --- native JSON -----------------------------------------------------------

namespace {

json parse_json(std::string_view document, const char* what) {
  try {
    return json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(what, std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, const std::string& element) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(element + "/" + key, "missing field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(element + "/" + key, "wrong type");
  }
}

Box box_field(const json& j, const std::string& element) {
  try {
    return Box(field<double>(j, "cx", element), field<double>(j, "cy", element),
               field<double>(j, "w", element), field<double>(j, "h", element));
  } catch (const std::invalid_argument& e) {
    throw ParseError(element, e.what());
  }
}

}  // namespace

GroundTruthImage parse_ground_truth_json(std::string_view document) {
  const json j = parse_json(document, "ground_truth");
  const json img = field<json>(j, "image", "ground_truth");
  std::optional<ImageRef> image;
  try {
    image.emplace(field<std::string>(img, "id", "image"), field<int>(img, "width", "image"),
                  field<int>(img, "height", "image"), img.value("uri", std::string{}));
  } catch (const std::invalid_argument& e) {
    throw ParseError("image", e.what());
  }
  LabelTable labels;
  try {
    labels = LabelTable(field<std::vector<std::string>>(j, "labels", "ground_truth"));
  } catch (const std::invalid_argument& e) {
    throw ParseError("labels", e.what());
  }
  std::vector<GroundTruthObject> objects;
  const json arr = field<json>(j, "objects", "ground_truth");
  if (!arr.is_array()) throw ParseError("objects", "must be an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string element = "objects[" + std::to_string(i) + "]";
    objects.push_back({field<int>(arr[i], "class", element), box_field(arr[i], element)});
  }
  GroundTruthImage gt{std::move(*image), std::move(objects), std::move(labels)};
  gt.validate();
  return gt;
}

std::string ground_truth_to_json(const GroundTruthImage& gt) {
  json objects = json::array();
  for (const GroundTruthObject& o : gt.objects) {
    objects.push_back(
        {{"class", o.class_id}, {"cx", o.box.cx}, {"cy", o.box.cy}, {"w", o.box.w}, {"h", o.box.h}});
  }
  json j = {{"image",
             {{"id", gt.image.id},
              {"width", gt.image.width},
              {"height", gt.image.height},
              {"uri", gt.image.uri}}},
            {"labels", gt.labels.names()},
            {"objects", std::move(objects)}};
  return j.dump(1);
}

namespace {

std::string fixed4(double v) {
  v = std::round(v * 1e4) / 1e4 + 0.0;  // +0.0 folds -0 into 0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string export_annotations(std::span<const RefinedAnnotation> results, const ImageRef& image) {
  std::string out = "{\"boxes\":[";
  bool first = true;
  for (const RefinedAnnotation& r : results) {
    if (r.provenance == Provenance::Unresolved || !r.box) continue;
    if (!first) out += ',';
    first = false;
    out += "{\"class\":" + std::to_string(r.class_id);
    out += ",\"cx\":" + fixed4(r.box->cx);
    out += ",\"cy\":" + fixed4(r.box->cy);
    out += ",\"depth\":" + std::to_string(r.depth);
    out += ",\"effective_prob\":" + fixed4(r.effective_prob);
    out += ",\"h\":" + fixed4(r.box->h);
    out += ",\"provenance\":" + json(std::string(to_string(r.provenance))).dump();
    out += ",\"source_click\":" + std::to_string(r.source_click);
    out += ",\"w\":" + fixed4(r.box->w);
    out += '}';
  }
  out += "],\"image_id\":" + json(image.id).dump() + "}";
  return out;
}

AnnotationDocument parse_annotations(std::string_view document) {
  const json j = parse_json(document, "annotations");
  AnnotationDocument doc;
  doc.image_id = field<std::string>(j, "image_id", "annotations");
  const json arr = field<json>(j, "boxes", "annotations");
  if (!arr.is_array()) throw ParseError("boxes", "must be an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string element = "boxes[" + std::to_string(i) + "]";
    RefinedAnnotation r;
    r.box = box_field(arr[i], element);
    r.class_id = field<int>(arr[i], "class", element);
    r.effective_prob = field<double>(arr[i], "effective_prob", element);
    try {
      r.provenance = provenance_from_string(field<std::string>(arr[i], "provenance", element));
    } catch (const std::invalid_argument& e) {
      throw ParseError(element + "/provenance", e.what());
    }
    r.depth = field<int>(arr[i], "depth", element);
    r.source_click = field<int>(arr[i], "source_click", element);
    try {
      r.validate();
    } catch (const std::logic_error& e) {
      throw ParseError(element, e.what());
    }
    doc.boxes.push_back(std::move(r));
  }
  return doc;
}

LabelTable parse_label_table(std::string_view document) {
  const json j = parse_json(document, "labels");
  if (!j.is_array()) throw ParseError("labels", "must be an array of names");
  try {
    return LabelTable(j.get<std::vector<std::string>>());
  } catch (const json::exception&) {
    throw ParseError("labels", "must be an array of names");
  } catch (const std::invalid_argument& e) {
    throw ParseError("labels", e.what());
  }
}

std::string label_table_to_json(const LabelTable& labels) { return json(labels.names()).dump(); }

// --- dataset directories -----------------------------------------------------

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<GroundTruthImage> load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("dataset directory not found: " + dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".json" || ext == ".xml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  LabelTable shared;
  const fs::path label_file = dir / "labels.json";
  if (fs::exists(label_file)) shared = parse_label_table(read_file(label_file));

  std::vector<GroundTruthImage> images;
  std::vector<std::size_t> voc_images;
  for (const fs::path& f : files) {
    if (f.filename() == "labels.json") continue;
    try {
      if (f.extension() == ".xml") {
        GroundTruthImage gt = parse_voc_xml(read_file(f), shared);
        shared = gt.labels;
        voc_images.push_back(images.size());
        images.push_back(std::move(gt));
      } else {
        images.push_back(parse_ground_truth_json(read_file(f)));
      }
    } catch (const ParseError& e) {
      throw ParseError(f.filename().string() + ":" + e.element(), e.what());
    }
  }
  for (std::size_t i : voc_images) images[i].labels = shared;
  return images;
}

void write_dataset(const std::filesystem::path& dir, std::span<const GroundTruthImage> images) {
  std::filesystem::create_directories(dir);
  for (const GroundTruthImage& gt : images) {
    std::ofstream out(dir / (gt.image.id + ".json"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write into " + dir.string());
    out << ground_truth_to_json(gt) << '\n';
  }
}

std::vector<GroundTruthImage> synthesize_corpus(const SyntheticCorpusSpec& spec) {
  if (spec.images < 0 || spec.min_objects < 0 || spec.max_objects < spec.min_objects ||
      spec.classes < 1 || spec.min_width < 1 || spec.max_width < spec.min_width ||
      spec.min_height < 1 || spec.max_height < spec.min_height ||
      !(spec.min_size_frac > 0.0) || spec.max_size_frac < spec.min_size_frac ||
      spec.max_size_frac > 1.0) {
    throw std::invalid_argument("synthetic corpus: inconsistent parameters");
  }
  std::vector<std::string> names;
  for (int c = 0; c < spec.classes; ++c) names.push_back("class_" + std::to_string(c));
  const LabelTable labels(names);

  std::vector<GroundTruthImage> out;
  out.reserve(static_cast<std::size_t>(spec.images));
  for (int i = 0; i < spec.images; ++i) {
    KeyedRng rng(hash_combine(spec.seed, static_cast<std::uint64_t>(i)));
    const int width = rng.uniform_int(spec.min_width, spec.max_width);
    const int height = rng.uniform_int(spec.min_height, spec.max_height);
    char id[32];
    std::snprintf(id, sizeof id, "syn_%05d", i);
    GroundTruthImage gt{ImageRef(id, width, height, std::string(id) + ".png"), {}, labels};

    const int wanted = rng.uniform_int(spec.min_objects, spec.max_objects);
    for (int attempt = 0; attempt < 200 * std::max(wanted, 1) &&
                          static_cast<int>(gt.objects.size()) < wanted;
         ++attempt) {
      const double w = width * rng.uniform(spec.min_size_frac, spec.max_size_frac);
      const double h = height * rng.uniform(spec.min_size_frac, spec.max_size_frac);
      const double cx = rng.uniform(w / 2.0, width - w / 2.0);
      const double cy = rng.uniform(h / 2.0, height - h / 2.0);
      const int cls = rng.uniform_int(0, spec.classes - 1);
      const Box box(cx, cy, w, h);
      const bool clash = std::any_of(gt.objects.begin(), gt.objects.end(), [&](const auto& o) {
        return box_iou(o.box, box) > 0.2 || o.box.contains(box.cx, box.cy) ||
               box.contains(o.box.cx, o.box.cy);
      });
      if (!clash) gt.objects.push_back({cls, box});
    }
    out.push_back(std::move(gt));
  }
  return out;
}

}  // namespace oneclick
