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

// HTTP front end of the review store.
//
//   GET  /api/items?status=pending&offset=0&limit=50   -> {items:[...], total:n}
//   GET  /api/items/{id}                               -> item + image + category name
//   GET  /api/images/{dataset}/{image_id}              -> image bytes
//   POST /api/items/{id}/decision                      -> updated item
//        {action:"accept"|"reject"|"relabel"|"adjust", category_id?, bbox?, actor}
//   GET  /api/labelspace                               -> {categories:[...]}
//   GET  /api/stats                                    -> status and route counts
//
// Status codes: 400 malformed request or bad page, 403 traversal, 404 unknown
// item/image, 409 already decided, 422 invalid category/box/action, 500 storage.

#include <filesystem>
#include <optional>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "labelfuse/ingest.hpp"
#include "labelfuse/review.hpp"

namespace labelfuse {

inline int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kAlreadyDecided: return 409;
    case ErrorCode::kForbidden: return 403;
    case ErrorCode::kBadPage:
    case ErrorCode::kParseError: return 400;
    case ErrorCode::kInvalidCategory:
    case ErrorCode::kInvalidBox:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kSchemaError: return 422;
    default: return 500;
  }
}

inline ReviewDecision parse_decision_body(const std::string& body, std::string* actor) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParseError, std::string("decision body: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kParseError, "decision body is not an object");
  if (!j.contains("actor") || !j["actor"].is_string() || j["actor"].get<std::string>().empty()) {
    fail(ErrorCode::kInvalidArgument, "decision needs a non-empty actor");
  }
  *actor = j["actor"].get<std::string>();
  if (!j.contains("action") || !j["action"].is_string()) {
    fail(ErrorCode::kInvalidArgument, "decision needs an action");
  }
  const auto action = j["action"].get<std::string>();
  if (action == "accept") return AcceptDecision{};
  if (action == "reject") return RejectDecision{};
  if (action == "relabel") {
    if (!j.contains("category_id") || !j["category_id"].is_number_integer() ||
        j["category_id"].get<long long>() < 0) {
      fail(ErrorCode::kInvalidCategory, "relabel needs a non-negative integer category_id");
    }
    const auto id = j["category_id"].get<long long>();
    if (id > static_cast<long long>(std::numeric_limits<CategoryId>::max())) {
      fail(ErrorCode::kInvalidCategory, "category_id out of range");
    }
    return RelabelDecision{static_cast<CategoryId>(id)};
  }
  if (action == "adjust") {
    if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4) {
      fail(ErrorCode::kInvalidBox, "adjust needs bbox [x, y, w, h]");
    }
    double v[4];
    for (int k = 0; k < 4; ++k) {
      if (!j["bbox"][k].is_number()) fail(ErrorCode::kInvalidBox, "bbox entries must be numbers");
      v[k] = j["bbox"][k].get<double>();
    }
    return AdjustDecision{BoxCoords{v[0], v[1], v[2], v[3]}};
  }
  fail(ErrorCode::kInvalidArgument, "unknown action '" + action + "'");
}

class ReviewServer {
 public:
  ReviewServer(ReviewStore& store, std::filesystem::path data_root,
               nlohmann::json route_counts = nlohmann::json::object(),
               std::optional<std::filesystem::path> ui_dir = std::nullopt)
      : store_(store), data_root_(std::move(data_root)), route_counts_(std::move(route_counts)) {
    if (ui_dir) server_.set_mount_point("/ui", ui_dir->string());
    install_routes();
  }

  int bind_to_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
  bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

 private:
  template <typename Fn>
  void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      res.status = http_status_for(e.code());
      nlohmann::json body = {{"error", std::string(error_code_name(e.code()))},
                             {"message", e.what()}};
      res.set_content(body.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(nlohmann::json{{"error", "Internal"}, {"message", e.what()}}.dump(),
                      "application/json");
    }
  }

  static void send_json(httplib::Response& res, const nlohmann::ordered_json& j) {
    res.set_content(j.dump(), "application/json");
  }

  static std::size_t query_number(const httplib::Request& req, const char* key,
                                  std::size_t fallback) {
    if (!req.has_param(key)) return fallback;
    const auto text = req.get_param_value(key);
    std::size_t value = 0;
    if (!detail::parse_full(std::string_view(text), value)) {
      fail(ErrorCode::kBadPage, std::string("query parameter '") + key + "' is not a count");
    }
    return value;
  }

  nlohmann::ordered_json item_detail(const ReviewItem& item) const {
    auto j = review_item_to_json(item);
    const auto& ctx = store_.context();
    j["category_name"] = ctx.label_space.name(item.candidate.category_id());
    if (auto it = ctx.images.find(item.candidate.image()); it != ctx.images.end()) {
      j["image"] = {{"width", it->second.width()},
                    {"height", it->second.height()},
                    {"file_path", it->second.file_path()}};
    }
    return j;
  }

  void install_routes() {
    server_.Get("/api/items", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::optional<std::size_t> filter;
        if (req.has_param("status")) {
          const auto s = req.get_param_value("status");
          if (s != "all") {
            filter = status_index(s);
            if (!filter) fail(ErrorCode::kBadPage, "unknown status filter '" + s + "'");
          }
        }
        auto page = store_.list_items(filter, query_number(req, "offset", 0),
                                      query_number(req, "limit", 50));
        nlohmann::ordered_json items = nlohmann::ordered_json::array();
        for (const auto& item : page.items) items.push_back(item_detail(item));
        send_json(res, {{"items", std::move(items)}, {"total", page.total}});
      });
    });

    server_.Get("/api/items/:id", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, item_detail(store_.get(req.path_params.at("id")))); });
    });

    server_.Post("/api/items/:id/decision",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] {
                     std::string actor;
                     auto decision = parse_decision_body(req.body, &actor);
                     send_json(res, item_detail(store_.decide(req.path_params.at("id"), decision,
                                                              actor)));
                   });
                 });

    server_.Get("/api/images/:dataset/:image_id",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    auto blob = serve_image(data_root_, store_.context(),
                                            req.path_params.at("dataset"),
                                            req.path_params.at("image_id"));
                    res.set_content(std::move(blob.bytes), blob.content_type);
                  });
                });

    // Decoded %2F leaves extra segments that miss the route above.
    server_.Get(R"(/api/images/(.*))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string rest = req.matches[1];
        if (rest == ".." || rest.rfind("../", 0) == 0 || rest.find("/..") != std::string::npos ||
            rest.find('\\') != std::string::npos) {
          fail(ErrorCode::kForbidden, "image reference escapes the data root");
        }
        fail(ErrorCode::kNotFound, "image '" + rest + "'");
      });
    });

    server_.Get("/api/labelspace", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        send_json(res, {{"categories", categories_to_json(store_.context().label_space)}});
      });
    });

    server_.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        const auto counts = store_.counts();
        nlohmann::ordered_json status;
        std::size_t total = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
          status[kStatusNames[i]] = counts[i];
          total += counts[i];
        }
        send_json(res, {{"status", status}, {"total", total}, {"routes", route_counts_}});
      });
    });
  }

  ReviewStore& store_;
  std::filesystem::path data_root_;
  nlohmann::json route_counts_;
  httplib::Server server_;
};

}  // namespace labelfuse
