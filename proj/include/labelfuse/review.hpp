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

// Human review queue with an append-only decision log.
//
// On-disk layout of a store directory:
//   log.jsonl      one JSON record per line, never rewritten:
//                    {"seq":1,"type":"enqueue","item":{...}}
//                    {"seq":2,"type":"decide","item_id":"...","prior":{...},
//                     "new":{...},"actor":"...","ts":1700000000000}
//   snapshot.json  {"seq":N,"items":[...]}: state after record N, rewritten
//                  atomically (write + rename) every snapshot_every records.
//
// Opening a store loads the snapshot and replays log records past its seq.
// Mutations are serialized through one writer lock; readers take a shared
// lock only around the in-memory state.

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "labelfuse/core.hpp"
#include "labelfuse/ingest.hpp"
#include "labelfuse/review_item.hpp"

namespace labelfuse {

struct ReviewContext {
  LabelSpace label_space;
  std::map<ImageKey, ImageRecord> images;
};

inline ReviewContext make_review_context(const LabelSpace& space,
                                         const std::vector<ImageRecord>& images) {
  ReviewContext ctx{space, {}};
  for (const auto& img : images) ctx.images.emplace(key_of(img), img);
  return ctx;
}

struct AcceptDecision {};
struct RejectDecision {};
struct RelabelDecision {
  CategoryId category_id;
};
struct AdjustDecision {
  BoxCoords bbox;
};
using ReviewDecision = std::variant<AcceptDecision, RejectDecision, RelabelDecision, AdjustDecision>;

struct AuditRecord {
  std::uint64_t sequence_no;
  std::string item_id;
  ReviewStatus prior_status;
  ReviewStatus new_status;
  std::string actor;
  std::int64_t timestamp;
};

struct EnqueueResult {
  std::size_t added = 0;
  std::size_t duplicates = 0;
};

struct ItemPage {
  std::vector<ReviewItem> items;
  std::size_t total = 0;
};

// Per-status item counts, indexed like ReviewStatus alternatives.
using StatusCounts = std::array<std::size_t, std::variant_size_v<ReviewStatus>>;

inline std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

struct ReviewStoreOptions {
  std::size_t snapshot_every = 1000;
  std::function<std::int64_t()> clock = system_clock_ms;
};

namespace detail {

using ItemMap = std::map<std::string, ReviewItem>;

// Applies one log record to `items`. Returns the record's seq.
inline std::uint64_t apply_log_record(const nlohmann::json& rec, ItemMap& items) {
  const auto seq = rec.at("seq").get<std::uint64_t>();
  const auto type = rec.at("type").get<std::string>();
  if (type == "enqueue") {
    ReviewItem item = review_item_from_json(rec.at("item"));
    const std::string id = item.item_id;
    items.emplace(id, std::move(item));
  } else if (type == "decide") {
    auto it = items.find(rec.at("item_id").get<std::string>());
    if (it == items.end() || !it->second.pending()) {
      fail(ErrorCode::kStorageError, "log record " + std::to_string(seq) + " decides a non-pending item");
    }
    it->second.status = status_from_json(rec.at("new"));
    it->second.decided_by = rec.at("actor").get<std::string>();
    it->second.decided_at = rec.at("ts").get<std::int64_t>();
  } else {
    fail(ErrorCode::kStorageError, "unknown log record type '" + type + "'");
  }
  return seq;
}

struct LogScan {
  std::vector<nlohmann::json> records;
  std::uintmax_t valid_bytes = 0;  // prefix ending at the last complete record
};

inline LogScan scan_log(const std::filesystem::path& path) {
  LogScan scan;
  if (!std::filesystem::exists(path)) return scan;
  const std::string text = read_text_file(path);
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    ++line_no;
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) break;  // torn tail from an interrupted append
    std::string_view line(text.data() + start, nl - start);
    if (!line.empty()) {
      try {
        scan.records.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception&) {
        fail(ErrorCode::kStorageError, "corrupt log record at line " + std::to_string(line_no));
      }
    }
    start = nl + 1;
    scan.valid_bytes = start;
  }
  return scan;
}

}  // namespace detail

class ReviewStore {
 public:
  ReviewStore(std::filesystem::path dir, ReviewContext context, ReviewStoreOptions options = {})
      : dir_(std::move(dir)), context_(std::move(context)), options_(std::move(options)) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorCode::kStorageError, "cannot create '" + dir_.string() + "': " + ec.message());
    std::uint64_t snapshot_seq = 0;
    if (fs::exists(snapshot_path())) {
      try {
        const auto snap = nlohmann::json::parse(read_text_file(snapshot_path()));
        snapshot_seq = snap.at("seq").get<std::uint64_t>();
        for (const auto& j : snap.at("items")) {
          ReviewItem item = review_item_from_json(j);
          const std::string id = item.item_id;
          items_.emplace(id, std::move(item));
        }
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kStorageError, std::string("corrupt snapshot: ") + e.what());
      }
    }
    last_seq_ = snapshot_seq;
    auto scan = detail::scan_log(log_path());
    if (fs::exists(log_path()) && fs::file_size(log_path()) != scan.valid_bytes) {
      fs::resize_file(log_path(), scan.valid_bytes);
    }
    for (const auto& rec : scan.records) {
      try {
        const auto seq = rec.at("seq").get<std::uint64_t>();
        if (seq <= snapshot_seq) continue;
        last_seq_ = detail::apply_log_record(rec, items_);
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kStorageError, std::string("corrupt log record: ") + e.what());
      }
    }
    log_ = std::fopen(log_path().c_str(), "ab");
    if (!log_) fail(ErrorCode::kStorageError, "cannot open '" + log_path().string() + "'");
  }

  ReviewStore(const ReviewStore&) = delete;
  ReviewStore& operator=(const ReviewStore&) = delete;

  ~ReviewStore() {
    if (log_) std::fclose(log_);
  }

  const std::filesystem::path& directory() const { return dir_; }
  std::filesystem::path log_path() const { return dir_ / "log.jsonl"; }
  std::filesystem::path snapshot_path() const { return dir_ / "snapshot.json"; }
  const ReviewContext& context() const { return context_; }

  // Items whose id is already stored (or repeated within `items`) are
  // skipped and counted as duplicates.
  EnqueueResult enqueue(const std::vector<ReviewItem>& items) {
    std::lock_guard writer(writer_mu_);
    EnqueueResult result;
    std::set<std::string> batch;
    for (const auto& item : items) {
      if (!item.pending()) {
        fail(ErrorCode::kInvalidArgument, "enqueued item '" + item.item_id + "' is not pending");
      }
      validate_candidate(item);
    }
    for (const auto& item : items) {
      if (items_.count(item.item_id) || !batch.insert(item.item_id).second) {
        ++result.duplicates;
        continue;
      }
      nlohmann::ordered_json rec;
      rec["seq"] = last_seq_ + 1;
      rec["type"] = "enqueue";
      rec["item"] = review_item_to_json(item);
      append(rec);
      {
        std::unique_lock lock(state_mu_);
        items_.emplace(item.item_id, item);
      }
      ++result.added;
    }
    maybe_snapshot();
    return result;
  }

  static constexpr std::size_t kMaxPageSize = 500;

  ItemPage list_items(std::optional<std::size_t> status_filter, std::size_t offset,
                      std::size_t limit) const {
    if (limit < 1 || limit > kMaxPageSize) {
      fail(ErrorCode::kBadPage, "limit must lie in [1, 500]");
    }
    std::shared_lock lock(state_mu_);
    ItemPage page;
    for (const auto& [_, item] : items_) {
      if (status_filter && item.status.index() != *status_filter) continue;
      if (page.total >= offset && page.items.size() < limit) page.items.push_back(item);
      ++page.total;
    }
    return page;
  }

  ReviewItem get(const std::string& item_id) const {
    std::shared_lock lock(state_mu_);
    auto it = items_.find(item_id);
    if (it == items_.end()) fail(ErrorCode::kNotFound, "review item '" + item_id + "'");
    return it->second;
  }

  std::vector<ReviewItem> items() const {
    std::shared_lock lock(state_mu_);
    std::vector<ReviewItem> out;
    out.reserve(items_.size());
    for (const auto& [_, item] : items_) out.push_back(item);
    return out;
  }

  StatusCounts counts() const {
    std::shared_lock lock(state_mu_);
    StatusCounts c{};
    for (const auto& [_, item] : items_) ++c[item.status.index()];
    return c;
  }

  std::size_t size() const {
    std::shared_lock lock(state_mu_);
    return items_.size();
  }

  // Linearizable: of several concurrent decisions on one pending item,
  // exactly one succeeds and the others see AlreadyDecided.
  ReviewItem decide(const std::string& item_id, const ReviewDecision& decision,
                    const std::string& actor) {
    std::lock_guard writer(writer_mu_);
    auto it = items_.find(item_id);
    if (it == items_.end()) fail(ErrorCode::kNotFound, "review item '" + item_id + "'");
    const ReviewItem& current = it->second;
    if (!current.pending()) {
      fail(ErrorCode::kAlreadyDecided,
           "item '" + item_id + "' is already " + status_name(current.status));
    }
    if (actor.empty()) fail(ErrorCode::kInvalidArgument, "decision without actor");
    ReviewStatus next = to_status(current, decision);
    const std::int64_t ts = options_.clock();

    nlohmann::ordered_json rec;
    rec["seq"] = last_seq_ + 1;
    rec["type"] = "decide";
    rec["item_id"] = item_id;
    rec["prior"] = status_to_json(current.status);
    rec["new"] = status_to_json(next);
    rec["actor"] = actor;
    rec["ts"] = ts;
    append(rec);

    ReviewItem updated = [&] {
      std::unique_lock lock(state_mu_);
      it->second.status = std::move(next);
      it->second.decided_by = actor;
      it->second.decided_at = ts;
      return it->second;
    }();
    maybe_snapshot();
    return updated;
  }

  std::vector<AuditRecord> audit_log() const {
    std::lock_guard writer(writer_mu_);
    std::vector<AuditRecord> out;
    for (const auto& rec : detail::scan_log(log_path()).records) {
      if (rec.at("type") != "decide") continue;
      out.push_back({rec.at("seq").get<std::uint64_t>(), rec.at("item_id").get<std::string>(),
                     status_from_json(rec.at("prior")), status_from_json(rec.at("new")),
                     rec.at("actor").get<std::string>(), rec.at("ts").get<std::int64_t>()});
    }
    return out;
  }

  void snapshot() {
    std::lock_guard writer(writer_mu_);
    write_snapshot();
  }

  // Rebuilds item state from the log alone, ignoring any snapshot.
  static std::vector<ReviewItem> replay(const std::filesystem::path& log_path) {
    detail::ItemMap items;
    for (const auto& rec : detail::scan_log(log_path).records) {
      try {
        detail::apply_log_record(rec, items);
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kStorageError, std::string("corrupt log record: ") + e.what());
      }
    }
    std::vector<ReviewItem> out;
    for (auto& [_, item] : items) out.push_back(std::move(item));
    return out;
  }

 private:
  void validate_candidate(const ReviewItem& item) const {
    const auto& c = item.candidate;
    if (!context_.label_space.contains(c.category_id())) {
      fail(ErrorCode::kInvalidCategory, "item '" + item.item_id + "' category " +
                                            std::to_string(c.category_id()));
    }
    auto img = context_.images.find(c.image());
    if (img == context_.images.end()) {
      fail(ErrorCode::kNotFound, "item '" + item.item_id + "' references unknown image '" +
                                     c.image().dataset + "/" + c.image().image_id + "'");
    }
    if (!box_inside(c.bbox(), img->second)) {
      fail(ErrorCode::kInvalidBox, "item '" + item.item_id + "' box exceeds its image");
    }
  }

  ReviewStatus to_status(const ReviewItem& item, const ReviewDecision& decision) const {
    if (std::holds_alternative<AcceptDecision>(decision)) return Accepted{};
    if (std::holds_alternative<RejectDecision>(decision)) return Rejected{};
    if (const auto* r = std::get_if<RelabelDecision>(&decision)) {
      if (!context_.label_space.contains(r->category_id)) {
        fail(ErrorCode::kInvalidCategory, "category " + std::to_string(r->category_id) +
                                              " is not in the unified label space");
      }
      return Relabeled{r->category_id};
    }
    const auto& coords = std::get<AdjustDecision>(decision).bbox;
    if (!BoundingBox::is_valid(coords.x, coords.y, coords.w, coords.h)) {
      fail(ErrorCode::kInvalidBox, "adjusted box needs x,y >= 0 and w,h > 0");
    }
    BoundingBox box(coords);
    const auto& img = context_.images.at(item.candidate.image());
    if (!box_inside(box, img)) fail(ErrorCode::kInvalidBox, "adjusted box exceeds its image");
    return Adjusted{box};
  }

  void append(const nlohmann::ordered_json& rec) {
    const std::string line = rec.dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0) {
      fail(ErrorCode::kStorageError, "append to '" + log_path().string() + "' failed");
    }
    ++last_seq_;
    ++since_snapshot_;
  }

  void maybe_snapshot() {
    if (options_.snapshot_every > 0 && since_snapshot_ >= options_.snapshot_every) {
      write_snapshot();
    }
  }

  void write_snapshot() {
    nlohmann::ordered_json snap;
    snap["seq"] = last_seq_;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    {
      std::shared_lock lock(state_mu_);
      for (const auto& [_, item] : items_) arr.push_back(review_item_to_json(item));
    }
    snap["items"] = std::move(arr);
    const auto tmp = dir_ / "snapshot.json.tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << snap.dump() << "\n";
      if (!out) fail(ErrorCode::kStorageError, "cannot write snapshot");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, snapshot_path(), ec);
    if (ec) fail(ErrorCode::kStorageError, "cannot install snapshot: " + ec.message());
    since_snapshot_ = 0;
  }

  std::filesystem::path dir_;
  ReviewContext context_;
  ReviewStoreOptions options_;
  std::FILE* log_ = nullptr;
  mutable std::mutex writer_mu_;
  mutable std::shared_mutex state_mu_;
  detail::ItemMap items_;
  std::uint64_t last_seq_ = 0;
  std::size_t since_snapshot_ = 0;
};

struct ApplyReport {
  std::size_t verified_added = 0;
  std::size_t already_present = 0;
  std::size_t rejected = 0;
  std::size_t pending = 0;
};

struct ApplyResult {
  UnifiedDataset dataset;
  ApplyReport report;
};

inline Annotation verified_annotation(const ReviewItem& item) {
  const auto& c = item.candidate;
  CategoryId category = c.category_id();
  BoundingBox bbox = c.bbox();
  ReviewAction action = ReviewAction::kAccepted;
  if (const auto* r = std::get_if<Relabeled>(&item.status)) {
    category = r->new_category_id;
    action = ReviewAction::kRelabeled;
  } else if (const auto* a = std::get_if<Adjusted>(&item.status)) {
    bbox = a->new_bbox;
    action = ReviewAction::kAdjusted;
  }
  return Annotation(c.image(), category, bbox,
                    Verified{item.decided_by.value_or("unknown"), item.payload(), action});
}

// Accepted, relabeled and adjusted items become Verified annotations;
// rejected and pending items are left out and counted. Annotations already
// present in `u` are not added again, so applying twice equals applying once.
inline ApplyResult apply_decisions(const UnifiedDataset& u, const std::vector<ReviewItem>& items) {
  ApplyResult result;
  std::vector<Annotation> annotations = u.annotations();
  for (const auto& item : items) {
    if (item.pending()) {
      ++result.report.pending;
      continue;
    }
    if (std::holds_alternative<Rejected>(item.status)) {
      ++result.report.rejected;
      continue;
    }
    Annotation a = verified_annotation(item);
    if (std::find(annotations.begin(), annotations.end(), a) != annotations.end()) {
      ++result.report.already_present;
      continue;
    }
    annotations.push_back(std::move(a));
    ++result.report.verified_added;
  }
  result.dataset = UnifiedDataset(u.label_space(), u.images(), std::move(annotations));
  return result;
}

inline ApplyResult apply_decisions(const UnifiedDataset& u, const ReviewStore& store) {
  return apply_decisions(u, store.items());
}

struct ImageBlob {
  std::string bytes;
  std::string content_type;
};

inline std::string content_type_for(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

// Images resolve to <data_root>/<dataset>/<file_path>. Anything that would
// leave data_root is Forbidden.
inline ImageBlob serve_image(const std::filesystem::path& data_root, const ReviewContext& ctx,
                             std::string_view dataset, std::string_view image_id) {
  namespace fs = std::filesystem;
  auto unsafe = [](std::string_view s) {
    return s.empty() || s == "." || s == ".." || s.find('/') != std::string_view::npos ||
           s.find('\\') != std::string_view::npos || s.find('\0') != std::string_view::npos;
  };
  if (unsafe(dataset) || unsafe(image_id)) {
    fail(ErrorCode::kForbidden, "image reference escapes the data root");
  }
  auto it = ctx.images.find(ImageKey{std::string(dataset), std::string(image_id)});
  if (it == ctx.images.end()) {
    fail(ErrorCode::kNotFound, "image '" + std::string(dataset) + "/" + std::string(image_id) + "'");
  }
  const fs::path rel(it->second.file_path());
  if (rel.is_absolute()) fail(ErrorCode::kForbidden, "absolute image path");
  const fs::path root = fs::weakly_canonical(data_root);
  const fs::path full = fs::weakly_canonical(root / std::string(dataset) / rel);
  auto [root_end, _] = std::mismatch(root.begin(), root.end(), full.begin(), full.end());
  if (root_end != root.end()) fail(ErrorCode::kForbidden, "image path escapes the data root");
  if (!fs::is_regular_file(full)) {
    fail(ErrorCode::kNotFound, "image file '" + full.string() + "' is missing");
  }
  return {read_text_file(full), content_type_for(full)};
}

}  // namespace labelfuse
