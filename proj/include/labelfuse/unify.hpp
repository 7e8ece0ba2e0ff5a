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

// Unified label space construction. Source names are resolved through a
// user-curated alias map (names equal after lowercasing merge on their
// own), the resolved names are sorted, and their sorted position becomes
// the unified id.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "labelfuse/core.hpp"
#include "labelfuse/ingest.hpp"

namespace labelfuse {

struct AliasGroup {
  std::string canonical;
  std::set<std::string> members;
};

class AliasMap {
 public:
  AliasMap() = default;

  explicit AliasMap(std::vector<AliasGroup> groups) {
    for (auto& g : groups) {
      AliasGroup normalized{normalize_name(g.canonical), {}};
      if (normalized.canonical.empty()) {
        fail(ErrorCode::kInvalidArgument, "alias group with empty canonical name");
      }
      for (const auto& m : g.members) {
        auto name = normalize_name(m);
        if (name.empty()) fail(ErrorCode::kInvalidArgument, "empty alias member");
        normalized.members.insert(std::move(name));
      }
      std::set<std::string> texts = normalized.members;
      texts.insert(normalized.canonical);
      for (const auto& t : texts) {
        auto [it, inserted] = lookup_.emplace(t, normalized.canonical);
        if (!inserted) {
          fail(ErrorCode::kAliasConflict, "'" + t + "' appears in groups '" + it->second +
                                              "' and '" + normalized.canonical + "'");
        }
      }
      groups_.push_back(std::move(normalized));
    }
  }

  std::string resolve(std::string_view name) const {
    auto normalized = normalize_name(name);
    auto it = lookup_.find(normalized);
    return it == lookup_.end() ? normalized : it->second;
  }

  const std::vector<AliasGroup>& groups() const { return groups_; }

 private:
  std::vector<AliasGroup> groups_;
  std::map<std::string, std::string> lookup_;
};

// One group per line: "canonical = member1, member2". '#' starts a comment.
inline AliasMap parse_alias_map(std::string_view text) {
  std::vector<AliasGroup> groups;
  std::size_t line_no = 0;
  for (auto line : detail::lines_of(text)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (normalize_name(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kParseError, "alias map line " + std::to_string(line_no) + ": missing '='");
    }
    AliasGroup g{normalize_name(line.substr(0, eq)), {}};
    if (g.canonical.empty()) {
      fail(ErrorCode::kParseError,
           "alias map line " + std::to_string(line_no) + ": empty canonical name");
    }
    std::string_view rest = line.substr(eq + 1);
    while (!rest.empty()) {
      auto comma = rest.find(',');
      auto member = normalize_name(rest.substr(0, comma));
      if (!member.empty()) g.members.insert(std::move(member));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    groups.push_back(std::move(g));
  }
  return AliasMap(std::move(groups));
}

// Total function from a source space's ids to unified ids.
class RemapTable {
 public:
  RemapTable(std::string dataset_id, std::vector<CategoryId> mapping)
      : dataset_id_(std::move(dataset_id)), mapping_(std::move(mapping)) {
    if (dataset_id_.empty()) fail(ErrorCode::kInvalidArgument, "remap table without dataset id");
  }

  static RemapTable identity(std::string dataset_id, std::size_t size) {
    std::vector<CategoryId> m(size);
    for (std::size_t i = 0; i < size; ++i) m[i] = static_cast<CategoryId>(i);
    return RemapTable(std::move(dataset_id), std::move(m));
  }

  const std::string& dataset_id() const { return dataset_id_; }
  const std::vector<CategoryId>& mapping() const { return mapping_; }
  std::size_t size() const { return mapping_.size(); }

  CategoryId map(CategoryId source) const {
    if (source >= mapping_.size()) {
      fail(ErrorCode::kUnknownCategory, "category " + std::to_string(source) +
                                            " outside remap table of '" + dataset_id_ + "'");
    }
    return mapping_[source];
  }

  // Unified ids this dataset annotates natively.
  std::set<CategoryId> image() const { return {mapping_.begin(), mapping_.end()}; }

  friend bool operator==(const RemapTable&, const RemapTable&) = default;

 private:
  std::string dataset_id_;
  std::vector<CategoryId> mapping_;
};

struct UnifiedSpace {
  LabelSpace space;
  std::vector<RemapTable> tables;  // input order
};

inline UnifiedSpace build_unified_space(
    const std::vector<std::pair<std::string, LabelSpace>>& spaces, const AliasMap& aliases) {
  if (spaces.empty()) fail(ErrorCode::kEmptyInput, "no label spaces to unify");
  std::set<std::string> ids;
  for (const auto& [id, _] : spaces) {
    if (!ids.insert(id).second) fail(ErrorCode::kInvalidArgument, "duplicate dataset id '" + id + "'");
  }

  // resolved name -> (source canonical names, source aliases) folded into it
  struct Folded {
    std::set<std::string> names;
    std::set<std::string> aliases;
  };
  std::map<std::string, Folded> folded;
  for (const auto& [_, space] : spaces) {
    for (const auto& cat : space.categories()) {
      auto& f = folded[aliases.resolve(cat.canonical_name())];
      f.names.insert(cat.canonical_name());
      f.aliases.insert(cat.aliases().begin(), cat.aliases().end());
    }
  }

  std::map<std::string, CategoryId> unified_id;
  for (const auto& [name, _] : folded) {
    unified_id.emplace(name, static_cast<CategoryId>(unified_id.size()));
  }
  std::vector<CategorySpec> cats;
  for (const auto& [name, f] : folded) {
    std::set<std::string> alias_names = f.aliases;
    for (const auto& n : f.names) {
      if (n != name) alias_names.insert(n);
    }
    // Canonical names of other unified categories cannot be aliases here.
    std::erase_if(alias_names, [&](const std::string& a) {
      return a != name && unified_id.count(a) > 0;
    });
    cats.emplace_back(unified_id[name], name, std::move(alias_names));
  }

  UnifiedSpace out{LabelSpace(std::move(cats)), {}};
  for (const auto& [id, space] : spaces) {
    std::vector<CategoryId> mapping;
    mapping.reserve(space.size());
    for (const auto& cat : space.categories()) {
      mapping.push_back(unified_id.at(aliases.resolve(cat.canonical_name())));
    }
    out.tables.emplace_back(id, std::move(mapping));
  }
  return out;
}

inline Dataset remap_dataset(const Dataset& d, const RemapTable& t, const LabelSpace& target) {
  if (t.dataset_id() != d.id()) {
    fail(ErrorCode::kTableMismatch,
         "table for '" + t.dataset_id() + "' applied to dataset '" + d.id() + "'");
  }
  if (t.size() != d.label_space().size()) {
    fail(ErrorCode::kTableMismatch, "table size " + std::to_string(t.size()) +
                                        " != label space size " +
                                        std::to_string(d.label_space().size()));
  }
  for (CategoryId id : t.mapping()) {
    if (!target.contains(id)) {
      fail(ErrorCode::kTableMismatch, "table maps to id " + std::to_string(id) +
                                          " outside target space");
    }
  }
  std::vector<Annotation> annotations;
  annotations.reserve(d.annotations().size());
  for (const auto& a : d.annotations()) {
    annotations.emplace_back(a.image(), t.map(a.category_id()), a.bbox(), a.provenance());
  }
  return Dataset(d.id(), target, d.images(), std::move(annotations));
}

inline std::vector<Detection> remap_detections(const std::vector<Detection>& dets,
                                               const RemapTable& t) {
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const auto& d : dets) out.push_back(d.with_category(t.map(d.category_id())));
  return out;
}

inline std::string remap_table_to_json(const RemapTable& t, const LabelSpace& source) {
  ordered_json doc;
  doc["dataset_id"] = t.dataset_id();
  doc["source_categories"] = source.names();
  doc["mapping"] = t.mapping();
  return doc.dump(1) + "\n";
}

inline RemapTable remap_table_from_json(std::string_view document) {
  const json root = detail::parse_json_text(document, "remap document");
  if (!root.is_object()) fail(ErrorCode::kSchemaError, "remap document is not an object");
  std::string id = detail::as_string(detail::field(root, "dataset_id", "remap"), "remap.dataset_id");
  const json& m = detail::array_field(root, "mapping", "remap");
  std::vector<CategoryId> mapping;
  for (const auto& v : m) {
    const long long n = detail::as_integer(v, "remap.mapping");
    if (n < 0) fail(ErrorCode::kSchemaError, "negative id in remap.mapping");
    mapping.push_back(static_cast<CategoryId>(n));
  }
  return RemapTable(std::move(id), std::move(mapping));
}

}  // namespace labelfuse
