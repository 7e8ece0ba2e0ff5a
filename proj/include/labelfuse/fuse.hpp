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

// Pseudo-label fusion: detections from foreign models are clustered per
// (image, category), each cluster is fused into one candidate box, and the
// candidate is routed to auto-accept, human review, or discard.

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "labelfuse/core.hpp"
#include "labelfuse/geometry.hpp"
#include "labelfuse/review_item.hpp"

namespace labelfuse {

enum class FusionStrategy { kWeightedAverage, kHighestScore };

inline std::optional<FusionStrategy> parse_fusion_strategy(std::string_view s) {
  if (s == "weighted_average") return FusionStrategy::kWeightedAverage;
  if (s == "highest_score") return FusionStrategy::kHighestScore;
  return std::nullopt;
}

class FusionConfig {
 public:
  static constexpr double kDefaultTauAccept = 0.7;
  static constexpr double kDefaultTauDiscard = 0.05;
  static constexpr double kDefaultSigmaCluster = 0.55;

  FusionConfig() : FusionConfig(kDefaultTauAccept, kDefaultTauDiscard, kDefaultSigmaCluster) {}

  FusionConfig(double tau_accept, double tau_discard, double sigma_cluster,
               FusionStrategy strategy = FusionStrategy::kWeightedAverage,
               bool suppress_gt_classes = true)
      : tau_accept_(tau_accept),
        tau_discard_(tau_discard),
        sigma_cluster_(sigma_cluster),
        strategy_(strategy),
        suppress_gt_classes_(suppress_gt_classes) {
    if (!(0.0 <= tau_discard_ && tau_discard_ < tau_accept_ && tau_accept_ <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "fusion thresholds need 0 <= tau_discard < tau_accept <= 1");
    }
    if (!(0.0 < sigma_cluster_ && sigma_cluster_ < 1.0)) {
      fail(ErrorCode::kInvalidArgument, "sigma_cluster must lie in (0, 1)");
    }
  }

  double tau_accept() const { return tau_accept_; }
  double tau_discard() const { return tau_discard_; }
  double sigma_cluster() const { return sigma_cluster_; }
  FusionStrategy strategy() const { return strategy_; }
  bool suppress_gt_classes() const { return suppress_gt_classes_; }

 private:
  double tau_accept_;
  double tau_discard_;
  double sigma_cluster_;
  FusionStrategy strategy_;
  bool suppress_gt_classes_;
};

enum class Route { kAccepted = 0, kNeedsReview = 1, kDiscarded = 2, kSuppressedByGt = 3 };
inline constexpr std::size_t kRouteCount = 4;

inline const char* route_name(Route r) {
  static constexpr const char* kNames[] = {"accepted", "needs_review", "discarded",
                                           "suppressed_by_gt"};
  return kNames[static_cast<int>(r)];
}

struct RoutedCandidate {
  Annotation candidate;
  Route route;
};

// A cluster's members, seed (highest score) first.
using Cluster = std::vector<Detection>;

inline std::vector<Cluster> cluster_detections(std::span<const Detection> dets, double sigma) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score() != dets[b].score()) return dets[a].score() > dets[b].score();
    return dets[a].model_id() < dets[b].model_id();
  });
  std::vector<Cluster> clusters;
  for (std::size_t i : order) {
    const Detection& d = dets[i];
    auto it = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) {
      return iou(c.front().bbox(), d.bbox()) >= sigma;
    });
    if (it == clusters.end()) {
      clusters.push_back({d});
    } else {
      it->push_back(d);
    }
  }
  return clusters;
}

struct FusedBox {
  BoundingBox bbox;
  double confidence;
  std::set<std::string> contributing_models;
};

inline FusedBox fuse_cluster(const Cluster& cluster, FusionStrategy strategy) {
  if (cluster.empty()) fail(ErrorCode::kInvalidArgument, "cannot fuse an empty cluster");
  std::set<std::string> models;
  for (const auto& d : cluster) models.insert(d.model_id());

  if (strategy == FusionStrategy::kHighestScore || cluster.size() == 1) {
    const Detection* top = &cluster.front();
    for (const auto& d : cluster) {
      if (d.score() > top->score()) top = &d;
    }
    return {top->bbox(), top->score(), std::move(models)};
  }

  double weight = 0, score_sum = 0;
  std::array<double, 4> acc{};
  for (const auto& d : cluster) {
    weight += d.score();
    score_sum += d.score();
    const auto& b = d.bbox();
    acc[0] += d.score() * b.x();
    acc[1] += d.score() * b.y();
    acc[2] += d.score() * b.w();
    acc[3] += d.score() * b.h();
  }
  if (weight <= 0) {
    // All-zero scores: fall back to the unweighted mean.
    acc = {};
    for (const auto& d : cluster) {
      const auto& b = d.bbox();
      acc[0] += b.x();
      acc[1] += b.y();
      acc[2] += b.w();
      acc[3] += b.h();
    }
    weight = static_cast<double>(cluster.size());
  }
  // Keep each coordinate inside the members' envelope despite rounding.
  std::array<double, 4> lo{}, hi{};
  auto coord = [](const BoundingBox& b, std::size_t k) {
    switch (k) {
      case 0: return b.x();
      case 1: return b.y();
      case 2: return b.w();
      default: return b.h();
    }
  };
  for (std::size_t k = 0; k < 4; ++k) {
    lo[k] = hi[k] = coord(cluster.front().bbox(), k);
    for (const auto& d : cluster) {
      lo[k] = std::min(lo[k], coord(d.bbox(), k));
      hi[k] = std::max(hi[k], coord(d.bbox(), k));
    }
    acc[k] = std::clamp(acc[k] / weight, lo[k], hi[k]);
  }
  const double confidence =
      std::clamp(score_sum / static_cast<double>(cluster.size()), 0.0, 1.0);
  return {BoundingBox(acc[0], acc[1], acc[2], acc[3]), confidence, std::move(models)};
}

inline std::string join_models(const std::set<std::string>& models) {
  std::string out;
  for (const auto& m : models) {
    if (!out.empty()) out += '+';
    out += m;
  }
  return out;
}

// Evaluation order: Discarded, SuppressedByGt, Accepted, NeedsReview.
// A candidate is SuppressedByGt when its class is native to the target and
// suppression is on, or when a ground-truth box of its class on the same
// image already overlaps it with IoU >= sigma_cluster.
inline RoutedCandidate route_candidate(const Annotation& candidate, const FusionConfig& cfg,
                                       const std::set<CategoryId>& native_categories,
                                       std::span<const Annotation> gt_on_image) {
  const double confidence = confidence_of(candidate.provenance());
  Route route = Route::kNeedsReview;
  const bool native = native_categories.count(candidate.category_id()) > 0;
  const bool duplicates_gt =
      std::any_of(gt_on_image.begin(), gt_on_image.end(), [&](const Annotation& g) {
        return g.category_id() == candidate.category_id() &&
               iou(g.bbox(), candidate.bbox()) >= cfg.sigma_cluster();
      });
  if (confidence < cfg.tau_discard()) {
    route = Route::kDiscarded;
  } else if ((cfg.suppress_gt_classes() && native) || duplicates_gt) {
    route = Route::kSuppressedByGt;
  } else if (confidence >= cfg.tau_accept()) {
    route = Route::kAccepted;
  }
  return {candidate, route};
}

struct FusionReport {
  std::size_t detections = 0;
  std::size_t clusters = 0;
  std::array<std::size_t, kRouteCount> routes{};
  // per unified category, per route
  std::vector<std::array<std::size_t, kRouteCount>> per_class;

  std::size_t count(Route r) const { return routes[static_cast<std::size_t>(r)]; }

  friend bool operator==(const FusionReport&, const FusionReport&) = default;
};

struct FusionResult {
  std::vector<Annotation> accepted;
  std::vector<ReviewItem> review;
  std::vector<RoutedCandidate> routed;  // every cluster, in output order
  FusionReport report;
};

struct FuseOptions {
  unsigned threads = 1;
};

namespace detail {

inline std::vector<RoutedCandidate> fuse_image(const ImageRecord& img,
                                               std::vector<const Detection*> dets,
                                               std::span<const Annotation> gt,
                                               const std::set<CategoryId>& native,
                                               const FusionConfig& cfg) {
  std::map<CategoryId, std::vector<Detection>> by_category;
  for (const Detection* d : dets) by_category[d->category_id()].push_back(*d);
  std::vector<RoutedCandidate> out;
  for (const auto& [category, group] : by_category) {
    for (const Cluster& cluster : cluster_detections(group, cfg.sigma_cluster())) {
      FusedBox fused = fuse_cluster(cluster, cfg.strategy());
      Pseudo payload{join_models(fused.contributing_models), fused.confidence};
      std::optional<BoundingBox> clamped;
      try {
        clamped = clamp_box(fused.bbox, img);
      } catch (const Error&) {
      }
      Annotation candidate(key_of(img), category, clamped.value_or(fused.bbox), payload);
      if (!clamped) {
        out.push_back({std::move(candidate), Route::kDiscarded});
        continue;
      }
      out.push_back(route_candidate(candidate, cfg, native, gt));
    }
  }
  return out;
}

}  // namespace detail

// `target` must already be remapped into the unified space; `native` lists
// the unified ids its own label space covers. Images are processed in
// parallel when options.threads > 1; output order is the image order of
// `target` either way.
inline FusionResult fuse_dataset(const Dataset& target, const std::set<CategoryId>& native,
                                 const std::vector<Detection>& foreign_detections,
                                 const FusionConfig& cfg, FuseOptions options = {}) {
  std::map<std::string_view, std::size_t> image_index;
  for (std::size_t i = 0; i < target.images().size(); ++i) {
    image_index.emplace(target.images()[i].id(), i);
  }
  std::vector<std::vector<const Detection*>> dets_per_image(target.images().size());
  for (const auto& d : foreign_detections) {
    auto it = image_index.find(d.image_id());
    if (it == image_index.end()) {
      fail(ErrorCode::kUnknownImage,
           "detection for image '" + d.image_id() + "' not in dataset '" + target.id() + "'");
    }
    if (!target.label_space().contains(d.category_id())) {
      fail(ErrorCode::kUnknownCategory, "detection category " + std::to_string(d.category_id()));
    }
    dets_per_image[it->second].push_back(&d);
  }
  std::vector<std::vector<Annotation>> gt_per_image(target.images().size());
  for (const auto& a : target.annotations()) {
    gt_per_image[image_index.at(a.image().image_id)].push_back(a);
  }

  const std::size_t n = target.images().size();
  std::vector<std::vector<RoutedCandidate>> per_image(n);
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < n; i += step) {
      per_image[i] = detail::fuse_image(target.images()[i], dets_per_image[i], gt_per_image[i],
                                        native, cfg);
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(options.threads, n));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  FusionResult result;
  result.report.detections = foreign_detections.size();
  result.report.per_class.assign(target.label_space().size(), {});
  std::size_t seq = 0;
  for (auto& image_candidates : per_image) {
    for (auto& rc : image_candidates) {
      const auto r = static_cast<std::size_t>(rc.route);
      ++result.report.clusters;
      ++result.report.routes[r];
      ++result.report.per_class[rc.candidate.category_id()][r];
      if (rc.route == Route::kAccepted) {
        result.accepted.push_back(rc.candidate);
      } else if (rc.route == Route::kNeedsReview) {
        char id[32];
        std::snprintf(id, sizeof(id), "-%06zu", ++seq);
        result.review.push_back(make_review_item(target.id() + id, rc.candidate));
      }
      result.routed.push_back(std::move(rc));
    }
  }
  return result;
}

inline void merge_report(FusionReport& into, const FusionReport& from) {
  into.detections += from.detections;
  into.clusters += from.clusters;
  for (std::size_t r = 0; r < kRouteCount; ++r) into.routes[r] += from.routes[r];
  if (into.per_class.size() < from.per_class.size()) into.per_class.resize(from.per_class.size());
  for (std::size_t c = 0; c < from.per_class.size(); ++c) {
    for (std::size_t r = 0; r < kRouteCount; ++r) into.per_class[c][r] += from.per_class[c][r];
  }
}

inline nlohmann::ordered_json fusion_report_to_json(const FusionReport& report,
                                                    const LabelSpace& space) {
  nlohmann::ordered_json j;
  j["detections"] = report.detections;
  j["clusters"] = report.clusters;
  nlohmann::ordered_json routes;
  for (std::size_t r = 0; r < kRouteCount; ++r) {
    routes[route_name(static_cast<Route>(r))] = report.routes[r];
  }
  j["routes"] = routes;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    nlohmann::ordered_json row;
    row["category_id"] = c;
    row["name"] = c < space.size() ? space.name(static_cast<CategoryId>(c)) : "";
    for (std::size_t r = 0; r < kRouteCount; ++r) {
      row[route_name(static_cast<Route>(r))] = report.per_class[c][r];
    }
    classes.push_back(std::move(row));
  }
  j["per_class"] = std::move(classes);
  return j;
}

inline std::string fusion_report_text(const FusionReport& report, const LabelSpace& space) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "detections %zu, clusters %zu\n", report.detections,
                report.clusters);
  out << line;
  std::snprintf(line, sizeof(line), "%-20s %10s %12s %10s %16s\n", "class", "accepted",
                "needs_review", "discarded", "suppressed_by_gt");
  out << line;
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& row = report.per_class[c];
    std::snprintf(line, sizeof(line), "%-20s %10zu %12zu %10zu %16zu\n",
                  space.name(static_cast<CategoryId>(c)).c_str(), row[0], row[1], row[2],
                  row[3]);
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-20s %10zu %12zu %10zu %16zu\n", "all", report.routes[0],
                report.routes[1], report.routes[2], report.routes[3]);
  out << line;
  return out.str();
}

}  // namespace labelfuse
