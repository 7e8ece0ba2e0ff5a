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

// Shared domain types. Every type here is an immutable value: constructors
// validate their invariants and throw labelfuse::Error on violation.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "labelfuse/error.hpp"

namespace labelfuse {

using CategoryId = std::uint32_t;

// Trimmed, ASCII-lowercased form used for every category name comparison.
inline std::string normalize_name(std::string_view raw) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  auto begin = std::find_if_not(raw.begin(), raw.end(), is_space);
  auto end = std::find_if_not(raw.rbegin(), std::string_view::reverse_iterator(begin),
                              is_space)
                 .base();
  std::string out(begin, end);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Unvalidated box coordinates, as read from a file or produced by arithmetic.
struct BoxCoords {
  double x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const BoxCoords&, const BoxCoords&) = default;
};

// Axis-aligned box, top-left corner plus size, absolute pixels.
class BoundingBox {
 public:
  static bool is_valid(double x, double y, double w, double h) {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
           std::isfinite(h) && x >= 0 && y >= 0 && w > 0 && h > 0;
  }

  BoundingBox(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
    if (!is_valid(x, y, w, h)) {
      fail(ErrorCode::kInvalidArgument, "bounding box must have x,y >= 0 and w,h > 0");
    }
  }
  explicit BoundingBox(const BoxCoords& c) : BoundingBox(c.x, c.y, c.w, c.h) {}

  double x() const { return x_; }
  double y() const { return y_; }
  double w() const { return w_; }
  double h() const { return h_; }
  double right() const { return x_ + w_; }
  double bottom() const { return y_ + h_; }
  double area() const { return w_ * h_; }
  BoxCoords coords() const { return {x_, y_, w_, h_}; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
  friend auto operator<=>(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_, y_, w_, h_;
};

class CategorySpec {
 public:
  CategorySpec(CategoryId id, std::string_view name, std::set<std::string> aliases = {})
      : id_(id), canonical_name_(normalize_name(name)) {
    if (canonical_name_.empty()) {
      fail(ErrorCode::kInvalidArgument, "category name is empty");
    }
    for (const auto& alias : aliases) {
      auto normalized = normalize_name(alias);
      if (normalized.empty()) fail(ErrorCode::kInvalidArgument, "empty alias");
      aliases_.insert(std::move(normalized));
    }
  }

  CategoryId id() const { return id_; }
  const std::string& canonical_name() const { return canonical_name_; }
  const std::set<std::string>& aliases() const { return aliases_; }

  friend bool operator==(const CategorySpec&, const CategorySpec&) = default;

 private:
  CategoryId id_;
  std::string canonical_name_;
  std::set<std::string> aliases_;
};

class LabelSpace {
 public:
  LabelSpace() = default;

  explicit LabelSpace(std::vector<CategorySpec> categories)
      : categories_(std::move(categories)) {
    for (std::size_t i = 0; i < categories_.size(); ++i) {
      const auto& cat = categories_[i];
      if (cat.id() != i) {
        fail(ErrorCode::kInvalidArgument,
             "category ids must be dense 0..k-1 in list order; got id " +
                 std::to_string(cat.id()) + " at position " + std::to_string(i));
      }
      if (!by_name_.emplace(cat.canonical_name(), cat.id()).second) {
        fail(ErrorCode::kInvalidArgument,
             "duplicate category name '" + cat.canonical_name() + "'");
      }
    }
    for (const auto& cat : categories_) {
      for (const auto& alias : cat.aliases()) {
        auto it = by_name_.find(alias);
        if (it != by_name_.end() && it->second != cat.id()) {
          fail(ErrorCode::kInvalidArgument, "alias '" + alias + "' of '" +
                                                cat.canonical_name() +
                                                "' names another category");
        }
      }
    }
  }

  static LabelSpace from_names(const std::vector<std::string>& names) {
    std::vector<CategorySpec> cats;
    cats.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
      cats.emplace_back(static_cast<CategoryId>(i), names[i]);
    }
    return LabelSpace(std::move(cats));
  }

  std::size_t size() const { return categories_.size(); }
  bool empty() const { return categories_.empty(); }
  bool contains(CategoryId id) const { return id < categories_.size(); }
  const std::vector<CategorySpec>& categories() const { return categories_; }
  const CategorySpec& at(CategoryId id) const {
    if (!contains(id)) {
      fail(ErrorCode::kUnknownCategory, "category id " + std::to_string(id));
    }
    return categories_[id];
  }
  const std::string& name(CategoryId id) const { return at(id).canonical_name(); }

  std::optional<CategoryId> find(std::string_view name) const {
    auto it = by_name_.find(normalize_name(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& c : categories_) out.push_back(c.canonical_name());
    return out;
  }

  friend bool operator==(const LabelSpace& a, const LabelSpace& b) {
    return a.categories_ == b.categories_;
  }

 private:
  std::vector<CategorySpec> categories_;
  std::map<std::string, CategoryId, std::less<>> by_name_;
};

class ImageRecord {
 public:
  ImageRecord(std::string id, std::string source_dataset, std::string file_path,
              int width, int height)
      : id_(std::move(id)),
        source_dataset_(std::move(source_dataset)),
        file_path_(std::move(file_path)),
        width_(width),
        height_(height) {
    if (id_.empty()) fail(ErrorCode::kInvalidArgument, "image id is empty");
    if (source_dataset_.empty()) {
      fail(ErrorCode::kInvalidArgument, "image source dataset is empty");
    }
    if (width_ <= 0 || height_ <= 0) {
      fail(ErrorCode::kInvalidArgument,
           "image '" + id_ + "' has non-positive dimensions");
    }
  }

  const std::string& id() const { return id_; }
  const std::string& source_dataset() const { return source_dataset_; }
  const std::string& file_path() const { return file_path_; }
  int width() const { return width_; }
  int height() const { return height_; }

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;

 private:
  std::string id_;
  std::string source_dataset_;
  std::string file_path_;
  int width_;
  int height_;
};

// Globally unique image reference: (source dataset, image id).
struct ImageKey {
  std::string dataset;
  std::string image_id;

  friend bool operator==(const ImageKey&, const ImageKey&) = default;
  friend auto operator<=>(const ImageKey&, const ImageKey&) = default;
};

inline ImageKey key_of(const ImageRecord& img) { return {img.source_dataset(), img.id()}; }

inline bool box_inside(const BoundingBox& b, const ImageRecord& img) {
  return b.right() <= img.width() && b.bottom() <= img.height();
}

// Intersects b with the image rectangle. Boxes already inside are returned
// unchanged, which makes the operation idempotent bit-for-bit.
inline BoundingBox clamp_box(const BoxCoords& b, const ImageRecord& img) {
  const double width = img.width();
  const double height = img.height();
  if (BoundingBox::is_valid(b.x, b.y, b.w, b.h) && b.x + b.w <= width &&
      b.y + b.h <= height) {
    return BoundingBox(b);
  }
  const double x1 = std::max(b.x, 0.0);
  const double y1 = std::max(b.y, 0.0);
  const double x2 = std::min(b.x + b.w, width);
  const double y2 = std::min(b.y + b.h, height);
  if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
        std::isfinite(y2)) ||
      !(x2 > x1 && y2 > y1)) {
    fail(ErrorCode::kDegenerateBox, "box has no area inside image '" + img.id() + "'");
  }
  double w = x2 - x1;
  double h = y2 - y1;
  // x1 + (x2 - x1) can round above x2.
  while (x1 + w > width) w = std::nextafter(w, 0.0);
  while (y1 + h > height) h = std::nextafter(h, 0.0);
  if (!(w > 0 && h > 0)) {
    fail(ErrorCode::kDegenerateBox, "box has no area inside image '" + img.id() + "'");
  }
  return BoundingBox(x1, y1, w, h);
}

inline BoundingBox clamp_box(const BoundingBox& b, const ImageRecord& img) {
  return clamp_box(b.coords(), img);
}

struct GroundTruth {
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Pseudo {
  std::string model_id;
  double confidence = 0;
  friend bool operator==(const Pseudo&, const Pseudo&) = default;
};

enum class ReviewAction { kAccepted, kRelabeled, kAdjusted };

inline std::string_view review_action_name(ReviewAction a) {
  switch (a) {
    case ReviewAction::kAccepted: return "accepted";
    case ReviewAction::kRelabeled: return "relabeled";
    case ReviewAction::kAdjusted: return "adjusted";
  }
  return "accepted";
}

inline std::optional<ReviewAction> parse_review_action(std::string_view s) {
  if (s == "accepted") return ReviewAction::kAccepted;
  if (s == "relabeled") return ReviewAction::kRelabeled;
  if (s == "adjusted") return ReviewAction::kAdjusted;
  return std::nullopt;
}

struct Verified {
  std::string reviewer;
  Pseudo original;
  ReviewAction action = ReviewAction::kAccepted;
  friend bool operator==(const Verified&, const Verified&) = default;
};

using Provenance = std::variant<GroundTruth, Pseudo, Verified>;

// Ground truth (and human-verified labels) count as fully confident.
inline double confidence_of(const Provenance& p) {
  if (const auto* pseudo = std::get_if<Pseudo>(&p)) return pseudo->confidence;
  return 1.0;
}

inline std::string_view provenance_source(const Provenance& p) {
  switch (p.index()) {
    case 0: return "gt";
    case 1: return "pseudo";
    default: return "verified";
  }
}

namespace detail {

inline void validate_pseudo(const Pseudo& p) {
  if (p.model_id.empty()) fail(ErrorCode::kInvalidArgument, "pseudo label without model id");
  if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
    fail(ErrorCode::kScoreOutOfRange, "pseudo confidence " + std::to_string(p.confidence));
  }
}

}  // namespace detail

class Annotation {
 public:
  Annotation(ImageKey image, CategoryId category_id, BoundingBox bbox,
             Provenance provenance = GroundTruth{})
      : image_(std::move(image)),
        category_id_(category_id),
        bbox_(bbox),
        provenance_(std::move(provenance)) {
    if (image_.dataset.empty() || image_.image_id.empty()) {
      fail(ErrorCode::kInvalidArgument, "annotation with empty image reference");
    }
    if (const auto* p = std::get_if<Pseudo>(&provenance_)) detail::validate_pseudo(*p);
    if (const auto* v = std::get_if<Verified>(&provenance_)) {
      detail::validate_pseudo(v->original);
      if (v->reviewer.empty()) fail(ErrorCode::kInvalidArgument, "verified label without reviewer");
    }
  }

  const ImageKey& image() const { return image_; }
  CategoryId category_id() const { return category_id_; }
  const BoundingBox& bbox() const { return bbox_; }
  const Provenance& provenance() const { return provenance_; }

  friend bool operator==(const Annotation&, const Annotation&) = default;

 private:
  ImageKey image_;
  CategoryId category_id_;
  BoundingBox bbox_;
  Provenance provenance_;
};

// One raw prediction of an external model, in that model's label space.
class Detection {
 public:
  Detection(std::string image_id, CategoryId category_id, BoundingBox bbox, double score,
            std::string model_id)
      : image_id_(std::move(image_id)),
        category_id_(category_id),
        bbox_(bbox),
        score_(score),
        model_id_(std::move(model_id)) {
    if (!(score_ >= 0.0 && score_ <= 1.0)) {
      fail(ErrorCode::kScoreOutOfRange, "detection score " + std::to_string(score_));
    }
    if (image_id_.empty()) fail(ErrorCode::kInvalidArgument, "detection without image id");
    if (model_id_.empty()) fail(ErrorCode::kInvalidArgument, "detection without model id");
  }

  const std::string& image_id() const { return image_id_; }
  CategoryId category_id() const { return category_id_; }
  const BoundingBox& bbox() const { return bbox_; }
  double score() const { return score_; }
  const std::string& model_id() const { return model_id_; }

  Detection with_category(CategoryId id) const {
    return Detection(image_id_, id, bbox_, score_, model_id_);
  }

  friend bool operator==(const Detection&, const Detection&) = default;

 private:
  std::string image_id_;
  CategoryId category_id_;
  BoundingBox bbox_;
  double score_;
  std::string model_id_;
};

namespace detail {

using ImageIndex = std::map<ImageKey, const ImageRecord*>;

inline ImageIndex index_images(const std::vector<ImageRecord>& images) {
  ImageIndex index;
  for (const auto& img : images) {
    if (!index.emplace(key_of(img), &img).second) {
      fail(ErrorCode::kInvalidArgument, "duplicate image '" + img.source_dataset() + "/" +
                                            img.id() + "'");
    }
  }
  return index;
}

inline auto provenance_tuple(const Provenance& p) {
  Pseudo payload;
  std::string reviewer;
  int action = -1;
  if (const auto* ps = std::get_if<Pseudo>(&p)) payload = *ps;
  if (const auto* v = std::get_if<Verified>(&p)) {
    payload = v->original;
    reviewer = v->reviewer;
    action = static_cast<int>(v->action);
  }
  return std::make_tuple(p.index(), payload.model_id, payload.confidence, reviewer, action);
}

inline void check_annotation(const Annotation& a, const ImageIndex& images,
                             const LabelSpace& space) {
  auto it = images.find(a.image());
  if (it == images.end()) {
    fail(ErrorCode::kDanglingRef,
         "annotation references unknown image '" + a.image().dataset + "/" + a.image().image_id + "'");
  }
  if (!space.contains(a.category_id())) {
    fail(ErrorCode::kUnknownCategory,
         "annotation category id " + std::to_string(a.category_id()));
  }
  if (!box_inside(a.bbox(), *it->second)) {
    fail(ErrorCode::kInvalidBox, "annotation box exceeds image '" + a.image().image_id + "'");
  }
}

}  // namespace detail

// A source dataset D_i with its own label space L_i.
class Dataset {
 public:
  Dataset(std::string id, LabelSpace label_space, std::vector<ImageRecord> images,
          std::vector<Annotation> annotations)
      : id_(std::move(id)),
        label_space_(std::move(label_space)),
        images_(std::move(images)),
        annotations_(std::move(annotations)) {
    if (id_.empty()) fail(ErrorCode::kInvalidArgument, "dataset id is empty");
    for (const auto& img : images_) {
      if (img.source_dataset() != id_) {
        fail(ErrorCode::kInvalidArgument,
             "image '" + img.id() + "' belongs to dataset '" + img.source_dataset() + "'");
      }
    }
    auto index = detail::index_images(images_);
    for (const auto& a : annotations_) detail::check_annotation(a, index, label_space_);
  }

  const std::string& id() const { return id_; }
  const LabelSpace& label_space() const { return label_space_; }
  const std::vector<ImageRecord>& images() const { return images_; }
  const std::vector<Annotation>& annotations() const { return annotations_; }

  const ImageRecord* find_image(std::string_view image_id) const {
    for (const auto& img : images_) {
      if (img.id() == image_id) return &img;
    }
    return nullptr;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::string id_;
  LabelSpace label_space_;
  std::vector<ImageRecord> images_;
  std::vector<Annotation> annotations_;
};

// Images of every source under the unified label space, with mixed-provenance
// annotations.
class UnifiedDataset {
 public:
  UnifiedDataset() = default;

  UnifiedDataset(LabelSpace label_space, std::vector<ImageRecord> images,
                 std::vector<Annotation> annotations)
      : label_space_(std::move(label_space)),
        images_(std::move(images)),
        annotations_(std::move(annotations)) {
    auto index = detail::index_images(images_);
    for (const auto& a : annotations_) detail::check_annotation(a, index, label_space_);
    std::vector<const Annotation*> sorted;
    sorted.reserve(annotations_.size());
    for (const auto& a : annotations_) sorted.push_back(&a);
    auto less = [](const Annotation* a, const Annotation* b) {
      if (a->image() != b->image()) return a->image() < b->image();
      if (a->category_id() != b->category_id()) return a->category_id() < b->category_id();
      if (a->bbox() != b->bbox()) return a->bbox() < b->bbox();
      return detail::provenance_tuple(a->provenance()) <
             detail::provenance_tuple(b->provenance());
    };
    std::sort(sorted.begin(), sorted.end(), less);
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (*sorted[i] == *sorted[i - 1]) {
        fail(ErrorCode::kInvalidArgument, "duplicate annotation on image '" +
                                              sorted[i]->image().image_id + "'");
      }
    }
  }

  const LabelSpace& label_space() const { return label_space_; }
  const std::vector<ImageRecord>& images() const { return images_; }
  const std::vector<Annotation>& annotations() const { return annotations_; }

  const ImageRecord* find_image(const ImageKey& key) const {
    for (const auto& img : images_) {
      if (img.source_dataset() == key.dataset && img.id() == key.image_id) return &img;
    }
    return nullptr;
  }

  friend bool operator==(const UnifiedDataset&, const UnifiedDataset&) = default;

 private:
  LabelSpace label_space_;
  std::vector<ImageRecord> images_;
  std::vector<Annotation> annotations_;
};

}  // namespace labelfuse
