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

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"
#include "labelfuse/core.hpp"
#include "labelfuse/error.hpp"

namespace labelfuse {

struct Pending {
  friend bool operator==(const Pending&, const Pending&) = default;
};
struct Accepted {
  friend bool operator==(const Accepted&, const Accepted&) = default;
};
struct Rejected {
  friend bool operator==(const Rejected&, const Rejected&) = default;
};
struct Relabeled {
  CategoryId new_category_id = 0;
  friend bool operator==(const Relabeled&, const Relabeled&) = default;
};
struct Adjusted {
  BoundingBox new_bbox{0, 0, 1, 1};
  friend bool operator==(const Adjusted&, const Adjusted&) = default;
};

using ReviewStatus = std::variant<Pending, Accepted, Rejected, Relabeled, Adjusted>;

inline constexpr const char* kStatusNames[] = {"pending", "accepted", "rejected", "relabeled",
                                               "adjusted"};

inline std::string status_name(const ReviewStatus& s) { return kStatusNames[s.index()]; }

inline std::optional<std::size_t> status_index(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kStatusNames); ++i) {
    if (name == kStatusNames[i]) return i;
  }
  return std::nullopt;
}

// A flagged pseudo-label candidate and its review state. Timestamps are
// milliseconds since the Unix epoch.
struct ReviewItem {
  std::string item_id;
  Annotation candidate;
  ReviewStatus status = Pending{};
  std::optional<std::string> decided_by;
  std::optional<std::int64_t> decided_at;

  bool pending() const { return std::holds_alternative<Pending>(status); }
  const Pseudo& payload() const { return std::get<Pseudo>(candidate.provenance()); }

  friend bool operator==(const ReviewItem&, const ReviewItem&) = default;
};

inline ReviewItem make_review_item(std::string item_id, Annotation candidate) {
  if (item_id.empty()) fail(ErrorCode::kInvalidArgument, "review item without id");
  if (!std::holds_alternative<Pseudo>(candidate.provenance())) {
    fail(ErrorCode::kInvalidArgument, "review candidate '" + item_id + "' is not a pseudo label");
  }
  return ReviewItem{std::move(item_id), std::move(candidate), Pending{}, std::nullopt,
                    std::nullopt};
}

inline nlohmann::ordered_json bbox_to_json(const BoundingBox& b) {
  return {b.x(), b.y(), b.w(), b.h()};
}

inline nlohmann::ordered_json status_to_json(const ReviewStatus& s) {
  nlohmann::ordered_json j;
  j["status"] = status_name(s);
  if (const auto* r = std::get_if<Relabeled>(&s)) j["category_id"] = r->new_category_id;
  if (const auto* a = std::get_if<Adjusted>(&s)) j["bbox"] = bbox_to_json(a->new_bbox);
  return j;
}

inline nlohmann::ordered_json review_item_to_json(const ReviewItem& item) {
  nlohmann::ordered_json j;
  j["item_id"] = item.item_id;
  const auto status = status_to_json(item.status);
  for (const auto& [k, v] : status.items()) j[k] = v;
  j["decided_by"] = item.decided_by ? nlohmann::ordered_json(*item.decided_by) : nullptr;
  j["decided_at"] = item.decided_at ? nlohmann::ordered_json(*item.decided_at) : nullptr;
  const auto& c = item.candidate;
  const auto& p = std::get<Pseudo>(c.provenance());
  j["candidate"] = {{"dataset", c.image().dataset},
                    {"image_id", c.image().image_id},
                    {"category_id", c.category_id()},
                    {"bbox", bbox_to_json(c.bbox())},
                    {"model_id", p.model_id},
                    {"confidence", p.confidence}};
  return j;
}

namespace detail {

inline BoundingBox json_bbox(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) fail(ErrorCode::kSchemaError, "bbox is not a 4-array");
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorCode::kSchemaError, "bbox entry is not a number");
  }
  try {
    return BoundingBox(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                       j[3].get<double>());
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidBox, e.what());
  }
}

}  // namespace detail

inline ReviewStatus status_from_json(const nlohmann::json& j) {
  if (!j.contains("status") || !j["status"].is_string()) {
    fail(ErrorCode::kSchemaError, "review status missing");
  }
  auto idx = status_index(j["status"].get<std::string>());
  if (!idx) fail(ErrorCode::kSchemaError, "unknown review status");
  switch (*idx) {
    case 0: return Pending{};
    case 1: return Accepted{};
    case 2: return Rejected{};
    case 3: {
      if (!j.contains("category_id") || !j["category_id"].is_number_unsigned()) {
        fail(ErrorCode::kSchemaError, "relabeled status without category_id");
      }
      return Relabeled{j["category_id"].get<CategoryId>()};
    }
    default:
      if (!j.contains("bbox")) fail(ErrorCode::kSchemaError, "adjusted status without bbox");
      return Adjusted{detail::json_bbox(j["bbox"])};
  }
}

inline ReviewItem review_item_from_json(const nlohmann::json& j) {
  try {
    const auto& c = j.at("candidate");
    Annotation candidate(
        ImageKey{c.at("dataset").get<std::string>(), c.at("image_id").get<std::string>()},
        c.at("category_id").get<CategoryId>(), detail::json_bbox(c.at("bbox")),
        Pseudo{c.at("model_id").get<std::string>(), c.at("confidence").get<double>()});
    ReviewItem item = make_review_item(j.at("item_id").get<std::string>(), std::move(candidate));
    item.status = status_from_json(j);
    if (j.contains("decided_by") && !j["decided_by"].is_null()) {
      item.decided_by = j["decided_by"].get<std::string>();
    }
    if (j.contains("decided_at") && !j["decided_at"].is_null()) {
      item.decided_at = j["decided_at"].get<std::int64_t>();
    }
    return item;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchemaError, std::string("review item: ") + e.what());
  }
}

}  // namespace labelfuse
