// Copyright 2026 The LabelFuse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Readers for COCO-style annotation documents, YOLO label directories and
// detection-result arrays, plus the unified-dataset exporter.
//
// All category ids are made dense at parse time: the i-th entry of a
// categories block becomes id i, whatever id the file gave it.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "labelfuse/core.hpp"

namespace labelfuse {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum class FormatKind { kCocoAnnotations, kYoloDirectory, kCocoDetections };

inline std::optional<FormatKind> parse_format_kind(std::string_view s) {
  if (s == "coco") return FormatKind::kCocoAnnotations;
  if (s == "yolo") return FormatKind::kYoloDirectory;
  if (s == "detections") return FormatKind::kCocoDetections;
  return std::nullopt;
}

// Annotations changed or removed while reading a source.
struct ParseReport {
  std::size_t clamped = 0;
  std::size_t dropped = 0;
};

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kParseError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline json parse_json_text(std::string_view document, std::string_view what) {
  try {
    return json::parse(document);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, document.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (document[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail(ErrorCode::kParseError, std::string(what) + " line " + std::to_string(line) +
                                     ", column " + std::to_string(column) + ": " + e.what());
  } catch (const json::exception& e) {
    // e.g. a number literal that overflows a double
    fail(ErrorCode::kParseError, std::string(what) + ": " + e.what());
  }
}

inline const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::kSchemaError, where + " is not an object");
  auto it = obj.find(name);
  if (it == obj.end()) {
    fail(ErrorCode::kSchemaError, "missing field '" + where + "." + name + "'");
  }
  return *it;
}

inline const json& array_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_array()) fail(ErrorCode::kSchemaError, "field '" + where + "." + name + "' is not an array");
  return v;
}

inline long long as_integer(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) {
      return static_cast<long long>(d);
    }
  }
  fail(ErrorCode::kSchemaError, "field '" + where + "' is not an integer");
}

inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(ErrorCode::kSchemaError, "field '" + where + "' is not a number");
  return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(ErrorCode::kSchemaError, "field '" + where + "' is not a string");
  return v.get<std::string>();
}

// Image ids may be integers or strings; both become opaque text.
inline std::string as_id(const json& v, const std::string& where) {
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s.empty()) fail(ErrorCode::kSchemaError, "field '" + where + "' is empty");
    return s;
  }
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return std::to_string(as_integer(v, where));
  fail(ErrorCode::kSchemaError, "field '" + where + "' is not an id");
}

inline BoxCoords as_bbox(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) {
    fail(ErrorCode::kSchemaError, "field '" + where + "' is not a 4-element array");
  }
  BoxCoords c{as_number(v[0], where), as_number(v[1], where), as_number(v[2], where),
              as_number(v[3], where)};
  return c;
}

inline int as_dimension(const json& v, const std::string& where) {
  const long long n = as_integer(v, where);
  if (n <= 0 || n > (1 << 30)) fail(ErrorCode::kSchemaError, "field '" + where + "' is not a positive size");
  return static_cast<int>(n);
}

struct ParsedCategories {
  LabelSpace space;
  std::map<long long, CategoryId> remap;
};

inline ParsedCategories parse_categories(const json& root) {
  const json& cats = array_field(root, "categories", "document");
  std::vector<CategorySpec> specs;
  std::map<long long, CategoryId> remap;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string where = "categories[" + std::to_string(i) + "]";
    const long long old_id = as_integer(field(cats[i], "id", where), where + ".id");
    const std::string name = as_string(field(cats[i], "name", where), where + ".name");
    std::set<std::string> aliases;
    if (auto it = cats[i].find("aliases"); it != cats[i].end()) {
      if (!it->is_array()) fail(ErrorCode::kSchemaError, where + ".aliases is not an array");
      for (const auto& a : *it) aliases.insert(as_string(a, where + ".aliases"));
    }
    const auto id = static_cast<CategoryId>(i);
    if (!remap.emplace(old_id, id).second) {
      fail(ErrorCode::kSchemaError, "duplicate category id " + std::to_string(old_id));
    }
    try {
      specs.emplace_back(id, name, std::move(aliases));
    } catch (const Error& e) {
      fail(ErrorCode::kSchemaError, where + ": " + e.what());
    }
    if (!seen.insert(specs.back().canonical_name()).second) {
      fail(ErrorCode::kSchemaError, "duplicate category name '" + specs.back().canonical_name() + "'");
    }
  }
  try {
    return {LabelSpace(std::move(specs)), std::move(remap)};
  } catch (const Error& e) {
    fail(ErrorCode::kSchemaError, std::string("categories: ") + e.what());
  }
}

inline Provenance parse_provenance(const json& ann, const std::string& where) {
  auto src = ann.find("source");
  if (src == ann.end()) return GroundTruth{};
  const std::string source = as_string(*src, where + ".source");
  if (source == "gt") return GroundTruth{};
  if (source != "pseudo" && source != "verified") {
    fail(ErrorCode::kSchemaError, "field '" + where + ".source' has unknown value '" + source + "'");
  }
  Pseudo payload{as_string(field(ann, "model_id", where), where + ".model_id"),
                 as_number(field(ann, "confidence", where), where + ".confidence")};
  if (!(payload.confidence >= 0 && payload.confidence <= 1)) {
    fail(ErrorCode::kScoreOutOfRange, where + ".confidence");
  }
  if (payload.model_id.empty()) fail(ErrorCode::kSchemaError, where + ".model_id is empty");
  if (source == "pseudo") return payload;
  const std::string action_text =
      as_string(field(ann, "review_action", where), where + ".review_action");
  auto action = parse_review_action(action_text);
  if (!action) fail(ErrorCode::kSchemaError, where + ".review_action '" + action_text + "'");
  std::string reviewer = as_string(field(ann, "reviewer", where), where + ".reviewer");
  if (reviewer.empty()) fail(ErrorCode::kSchemaError, where + ".reviewer is empty");
  return Verified{std::move(reviewer), std::move(payload), *action};
}

struct CocoContents {
  LabelSpace space;
  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;
};

// `dataset_id` empty means "unified": images carry their own source dataset
// extension fields and annotations carry provenance extensions.
inline CocoContents parse_coco(std::string_view document, const std::string& dataset_id,
                               ParseReport* report) {
  const json root = parse_json_text(document, "annotation document");
  if (!root.is_object()) fail(ErrorCode::kSchemaError, "document is not an object");
  const bool unified = dataset_id.empty();

  ParsedCategories cats = parse_categories(root);

  std::vector<ImageRecord> images;
  std::map<std::string, std::size_t> image_by_file_id;
  const json& imgs = array_field(root, "images", "document");
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const std::string where = "images[" + std::to_string(i) + "]";
    const json& img = imgs[i];
    std::string file_id = as_id(field(img, "id", where), where + ".id");
    std::string file_name = as_string(field(img, "file_name", where), where + ".file_name");
    const int width = as_dimension(field(img, "width", where), where + ".width");
    const int height = as_dimension(field(img, "height", where), where + ".height");
    std::string source = dataset_id;
    std::string image_id = file_id;
    if (unified) {
      source = as_string(field(img, "source_dataset", where), where + ".source_dataset");
      image_id = as_id(field(img, "source_image_id", where), where + ".source_image_id");
      if (source.empty()) fail(ErrorCode::kSchemaError, where + ".source_dataset is empty");
    }
    if (!image_by_file_id.emplace(file_id, images.size()).second) {
      fail(ErrorCode::kSchemaError, "duplicate image id '" + file_id + "'");
    }
    images.emplace_back(std::move(image_id), std::move(source), std::move(file_name), width,
                        height);
  }

  std::vector<Annotation> annotations;
  const json& anns = array_field(root, "annotations", "document");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string where = "annotations[" + std::to_string(i) + "]";
    const json& ann = anns[i];
    const std::string image_ref = as_id(field(ann, "image_id", where), where + ".image_id");
    const long long category_ref =
        as_integer(field(ann, "category_id", where), where + ".category_id");
    const BoxCoords raw = as_bbox(field(ann, "bbox", where), where + ".bbox");
    Provenance provenance = unified ? parse_provenance(ann, where) : Provenance{GroundTruth{}};

    auto img_it = image_by_file_id.find(image_ref);
    if (img_it == image_by_file_id.end()) {
      fail(ErrorCode::kDanglingRef, where + " references unknown image '" + image_ref + "'");
    }
    auto cat_it = cats.remap.find(category_ref);
    if (cat_it == cats.remap.end()) {
      fail(ErrorCode::kDanglingRef,
           where + " references unknown category " + std::to_string(category_ref));
    }
    const ImageRecord& img = images[img_it->second];
    std::optional<BoundingBox> box;
    try {
      box = clamp_box(raw, img);
    } catch (const Error&) {
      if (report) ++report->dropped;
      continue;
    }
    if (report && box->coords() != raw) ++report->clamped;
    annotations.emplace_back(key_of(img), cat_it->second, *box, std::move(provenance));
  }
  return {std::move(cats.space), std::move(images), std::move(annotations)};
}

}  // namespace detail

inline Dataset parse_coco_dataset(std::string_view document, const std::string& dataset_id,
                                  ParseReport* report = nullptr) {
  if (dataset_id.empty()) fail(ErrorCode::kInvalidArgument, "dataset id is empty");
  auto c = detail::parse_coco(document, dataset_id, report);
  return Dataset(dataset_id, std::move(c.space), std::move(c.images), std::move(c.annotations));
}

// Reads a document written by export_coco, restoring image sources and
// annotation provenance from the extension fields.
inline UnifiedDataset parse_unified_coco(std::string_view document,
                                         ParseReport* report = nullptr) {
  auto c = detail::parse_coco(document, "", report);
  try {
    return UnifiedDataset(std::move(c.space), std::move(c.images), std::move(c.annotations));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) fail(ErrorCode::kSchemaError, e.what());
    throw;
  }
}

inline ordered_json annotation_extensions(const Provenance& p) {
  ordered_json out = ordered_json::object();
  out["source"] = std::string(provenance_source(p));
  if (const auto* pseudo = std::get_if<Pseudo>(&p)) {
    out["model_id"] = pseudo->model_id;
    out["confidence"] = pseudo->confidence;
  } else if (const auto* v = std::get_if<Verified>(&p)) {
    out["model_id"] = v->original.model_id;
    out["confidence"] = v->original.confidence;
    out["review_action"] = std::string(review_action_name(v->action));
    out["reviewer"] = v->reviewer;
  }
  return out;
}

inline ordered_json categories_to_json(const LabelSpace& space) {
  ordered_json cats = ordered_json::array();
  for (const auto& c : space.categories()) {
    ordered_json cat = {{"id", c.id()}, {"name", c.canonical_name()}};
    if (!c.aliases().empty()) cat["aliases"] = c.aliases();
    cats.push_back(std::move(cat));
  }
  return cats;
}

// Images get sequential integer ids starting at 1; their original
// (dataset, id) pair travels in source_dataset / source_image_id.
inline std::string export_coco(const UnifiedDataset& u) {
  ordered_json doc;
  ordered_json images = ordered_json::array();
  std::map<ImageKey, std::size_t> file_ids;
  for (std::size_t i = 0; i < u.images().size(); ++i) {
    const auto& img = u.images()[i];
    file_ids[key_of(img)] = i + 1;
    images.push_back({{"id", i + 1},
                      {"file_name", img.file_path()},
                      {"width", img.width()},
                      {"height", img.height()},
                      {"source_dataset", img.source_dataset()},
                      {"source_image_id", img.id()}});
  }
  ordered_json annotations = ordered_json::array();
  for (std::size_t i = 0; i < u.annotations().size(); ++i) {
    const auto& a = u.annotations()[i];
    const auto& b = a.bbox();
    ordered_json entry = {{"id", i + 1},
                          {"image_id", file_ids.at(a.image())},
                          {"category_id", a.category_id()},
                          {"bbox", {b.x(), b.y(), b.w(), b.h()}},
                          {"area", b.area()},
                          {"iscrowd", 0}};
    const ordered_json ext = annotation_extensions(a.provenance());
    for (const auto& [k, v] : ext.items()) entry[k] = v;
    annotations.push_back(std::move(entry));
  }
  doc["images"] = std::move(images);
  doc["annotations"] = std::move(annotations);
  doc["categories"] = categories_to_json(u.label_space());
  return doc.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// YOLO

struct YoloBox {
  double cx = 0, cy = 0, w = 0, h = 0;
};

inline YoloBox to_yolo(const BoundingBox& b, int width, int height) {
  return {(b.x() + b.w() / 2) / width, (b.y() + b.h() / 2) / height, b.w() / width,
          b.h() / height};
}

inline BoxCoords from_yolo(const YoloBox& y, int width, int height) {
  return {(y.cx - y.w / 2) * width, (y.cy - y.h / 2) * height, y.w * width, y.h * height};
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_full(std::string_view token, T& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace detail

inline std::vector<std::string> read_names_file(const std::filesystem::path& path) {
  std::vector<std::string> names;
  const std::string text = read_text_file(path);
  for (auto line : detail::lines_of(text)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    names.emplace_back(line.substr(first, line.find_last_not_of(" \t\r") - first + 1));
  }
  return names;
}

// Layout: <root>/labels/<stem>.txt, <root>/sizes.tsv, images under
// <root>/images/<stem>.<ext> when present.
inline Dataset parse_yolo_dataset(const std::filesystem::path& root,
                                  const std::vector<std::string>& names,
                                  const std::string& dataset_id,
                                  ParseReport* report = nullptr) {
  namespace fs = std::filesystem;
  if (dataset_id.empty()) fail(ErrorCode::kInvalidArgument, "dataset id is empty");
  LabelSpace space;
  try {
    space = LabelSpace::from_names(names);
  } catch (const Error& e) {
    fail(ErrorCode::kSchemaError, std::string("names: ") + e.what());
  }

  std::map<std::string, std::pair<int, int>> sizes;
  const fs::path sizes_path = root / "sizes.tsv";
  if (fs::exists(sizes_path)) {
    const std::string text = read_text_file(sizes_path);
    const auto lines = detail::lines_of(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
      auto fields = detail::split_ws(lines[n]);
      if (fields.empty()) continue;
      const std::string where = "sizes.tsv line " + std::to_string(n + 1);
      int w = 0, h = 0;
      if (fields.size() != 3 || !detail::parse_full(fields[1], w) ||
          !detail::parse_full(fields[2], h) || w <= 0 || h <= 0) {
        fail(ErrorCode::kParseError, where + ": expected '<stem>\\t<width>\\t<height>'");
      }
      if (!sizes.emplace(std::string(fields[0]), std::make_pair(w, h)).second) {
        fail(ErrorCode::kParseError, where + ": duplicate stem '" + std::string(fields[0]) + "'");
      }
    }
  }

  std::map<std::string, fs::path> label_files;
  const fs::path labels_dir = root / "labels";
  if (fs::is_directory(labels_dir)) {
    for (const auto& entry : fs::directory_iterator(labels_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        label_files[entry.path().stem().string()] = entry.path();
      }
    }
  } else if (!fs::exists(sizes_path)) {
    fail(ErrorCode::kParseError, "'" + root.string() + "' has neither labels/ nor sizes.tsv");
  }

  std::set<std::string> stems;
  for (const auto& [stem, _] : sizes) stems.insert(stem);
  for (const auto& [stem, _] : label_files) stems.insert(stem);

  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;
  for (const auto& stem : stems) {
    auto size_it = sizes.find(stem);
    if (size_it == sizes.end()) {
      fail(ErrorCode::kMissingDimensions, "no size for image '" + stem + "' in sizes.tsv");
    }
    std::string file_path = "images/" + stem + ".jpg";
    for (const char* ext : {".png", ".jpg", ".jpeg", ".bmp"}) {
      if (fs::exists(root / "images" / (stem + ext))) {
        file_path = "images/" + stem + ext;
        break;
      }
    }
    images.emplace_back(stem, dataset_id, file_path, size_it->second.first,
                        size_it->second.second);
    const ImageRecord& img = images.back();

    auto label_it = label_files.find(stem);
    if (label_it == label_files.end()) continue;
    const std::string text = read_text_file(label_it->second);
    const auto lines = detail::lines_of(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
      auto tokens = detail::split_ws(lines[n]);
      if (tokens.empty()) continue;
      const std::string where = stem + ".txt line " + std::to_string(n + 1);
      if (tokens.size() != 5) fail(ErrorCode::kParseError, where + ": expected 5 fields");
      long long cls = 0;
      if (!detail::parse_full(tokens[0], cls) || cls < 0) {
        fail(ErrorCode::kParseError, where + ": bad class index");
      }
      YoloBox yb;
      double* targets[] = {&yb.cx, &yb.cy, &yb.w, &yb.h};
      for (int k = 0; k < 4; ++k) {
        if (!detail::parse_full(tokens[k + 1], *targets[k]) || !(*targets[k] >= 0.0) ||
            !(*targets[k] <= 1.0)) {
          fail(ErrorCode::kParseError, where + ": coordinate not a number in [0,1]");
        }
      }
      if (static_cast<unsigned long long>(cls) >= names.size()) {
        fail(ErrorCode::kIndexOutOfRange,
             where + ": class " + std::to_string(cls) + " with " + std::to_string(names.size()) +
                 " names");
      }
      const BoxCoords raw = from_yolo(yb, img.width(), img.height());
      std::optional<BoundingBox> box;
      try {
        box = clamp_box(raw, img);
      } catch (const Error&) {
        if (report) ++report->dropped;
        continue;
      }
      if (report && box->coords() != raw) ++report->clamped;
      annotations.emplace_back(key_of(img), static_cast<CategoryId>(cls), *box);
    }
  }
  return Dataset(dataset_id, std::move(space), std::move(images), std::move(annotations));
}

// ---------------------------------------------------------------------------
// Detection results

// Boxes reaching past the top/left edge are trimmed to the positive quadrant;
// boxes left without area are dropped and counted.
inline std::vector<Detection> parse_detections(std::string_view document,
                                               const std::string& model_id,
                                               const LabelSpace& model_space,
                                               ParseReport* report = nullptr) {
  const json root = detail::parse_json_text(document, "detection document");
  if (!root.is_array()) fail(ErrorCode::kSchemaError, "detection document is not an array");
  std::vector<Detection> out;
  out.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const std::string where = "detections[" + std::to_string(i) + "]";
    const json& e = root[i];
    std::string image_id = detail::as_id(detail::field(e, "image_id", where), where + ".image_id");
    const long long cat =
        detail::as_integer(detail::field(e, "category_id", where), where + ".category_id");
    BoxCoords raw = detail::as_bbox(detail::field(e, "bbox", where), where + ".bbox");
    const double score = detail::as_number(detail::field(e, "score", where), where + ".score");
    if (!(score >= 0.0 && score <= 1.0)) {
      fail(ErrorCode::kScoreOutOfRange, where + ".score = " + std::to_string(score));
    }
    if (cat < 0 || static_cast<unsigned long long>(cat) >= model_space.size()) {
      fail(ErrorCode::kUnknownCategory, where + ".category_id = " + std::to_string(cat));
    }
    if (raw.x < 0) {
      raw.w += raw.x;
      raw.x = 0;
    }
    if (raw.y < 0) {
      raw.h += raw.y;
      raw.y = 0;
    }
    if (!BoundingBox::is_valid(raw.x, raw.y, raw.w, raw.h)) {
      if (report) ++report->dropped;
      continue;
    }
    out.emplace_back(std::move(image_id), static_cast<CategoryId>(cat), BoundingBox(raw), score,
                     model_id);
  }
  return out;
}

inline std::string detections_to_json(const std::vector<Detection>& dets) {
  ordered_json arr = ordered_json::array();
  for (const auto& d : dets) {
    const auto& b = d.bbox();
    arr.push_back({{"image_id", d.image_id()},
                   {"category_id", d.category_id()},
                   {"bbox", {b.x(), b.y(), b.w(), b.h()}},
                   {"score", d.score()}});
  }
  return arr.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Label-space documents

inline std::string label_space_to_json(const LabelSpace& space) {
  ordered_json doc;
  doc["categories"] = categories_to_json(space);
  return doc.dump(1) + "\n";
}

inline LabelSpace label_space_from_json(std::string_view document) {
  const json root = detail::parse_json_text(document, "label-space document");
  if (!root.is_object()) fail(ErrorCode::kSchemaError, "label-space document is not an object");
  auto cats = detail::parse_categories(root);
  for (const auto& [old_id, id] : cats.remap) {
    if (old_id != static_cast<long long>(id)) {
      fail(ErrorCode::kSchemaError, "label-space ids must be dense and ordered");
    }
  }
  return std::move(cats.space);
}

}  // namespace labelfuse
