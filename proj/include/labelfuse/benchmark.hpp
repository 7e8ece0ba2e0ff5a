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

// Desk-scale stand-in for the "single-source vs pseudo-labelled" comparison.
//
// One simulated detector per dataset labels the images of every other
// dataset. Pseudo labels are scored against the hidden truth on the
// (dataset, class) pairs the participating detectors can fill: classes some
// other detector knows but the dataset itself does not annotate.
//
//   single[j]  accepted pseudo labels when detector j is the only source
//   fused      accepted pseudo labels fusing every detector
//   reviewed   fused plus review-queue items an oracle reviewer accepts
//              (IoU >= 0.5 with a hidden box of the same class). Reviewed
//              items keep their fused confidence, so they rank below every
//              auto-accepted label.

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "labelfuse/fuse.hpp"
#include "labelfuse/metrics.hpp"
#include "labelfuse/synthetic.hpp"
#include "labelfuse/unify.hpp"

namespace labelfuse {

enum class ReviewerKind { kNone, kOracle };

struct BenchmarkParams {
  WorldParams world;
  DetectorNoiseModel noise;
  FusionConfig fusion;
  ReviewerKind reviewer = ReviewerKind::kOracle;
  std::uint64_t detector_seed = 77;
  std::optional<std::vector<std::size_t>> detectors;  // dataset indices; default all
  unsigned threads = 1;
};

struct SourceScore {
  std::string model_id;
  double map50 = 0;
  double map50_95 = 0;
  std::size_t accepted = 0;
};

struct BenchmarkReport {
  std::vector<SourceScore> single;
  SourceScore fused;
  std::optional<SourceScore> reviewed;
  std::size_t review_queue = 0;
  std::size_t oracle_accepted = 0;
  std::size_t class_count = 0;

  double best_single_map50() const {
    double best = 0;
    for (const auto& s : single) best = std::max(best, s.map50);
    return best;
  }
};

namespace detail {

struct BenchContext {
  World world;
  UnifiedSpace unified;
  std::vector<Dataset> targets;                  // remapped into the unified space
  std::vector<std::set<CategoryId>> native;      // per dataset
  std::vector<std::vector<Detection>> dets;      // per detector dataset index, unified ids
  std::map<ImageKey, std::size_t> dataset_of;    // image -> dataset index
};

struct SourceRun {
  std::vector<EvalDetection> accepted;
  std::vector<EvalDetection> reviewed;
  std::size_t review_queue = 0;
  std::size_t oracle_accepted = 0;
};

inline std::map<std::string, std::size_t> dataset_index(const World& w) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < w.visible.size(); ++i) idx[w.visible[i].id()] = i;
  return idx;
}

// Unified ids dataset i could receive from `sources`.
inline std::set<CategoryId> fillable(const BenchContext& ctx, std::size_t i,
                                     const std::vector<std::size_t>& sources) {
  std::set<CategoryId> out;
  for (std::size_t j : sources) {
    if (j == i) continue;
    for (CategoryId c : ctx.native[j]) {
      if (!ctx.native[i].count(c)) out.insert(c);
    }
  }
  return out;
}

inline bool oracle_accepts(const Annotation& candidate,
                           const std::map<ImageKey, std::vector<const Annotation*>>& truth) {
  auto it = truth.find(candidate.image());
  if (it == truth.end()) return false;
  for (const Annotation* t : it->second) {
    if (t->category_id() == candidate.category_id() && iou(t->bbox(), candidate.bbox()) >= 0.5) {
      return true;
    }
  }
  return false;
}

inline SourceRun run_sources(const BenchContext& ctx, const std::vector<std::size_t>& sources,
                             const BenchmarkParams& p,
                             const std::map<ImageKey, std::vector<const Annotation*>>& truth) {
  SourceRun run;
  for (std::size_t i = 0; i < ctx.targets.size(); ++i) {
    const auto fill = fillable(ctx, i, sources);
    std::vector<Detection> foreign;
    for (std::size_t j : sources) {
      if (j == i) continue;
      for (const auto& d : ctx.dets[j]) {
        if (ctx.dataset_of.count(ImageKey{ctx.targets[i].id(), d.image_id()})) foreign.push_back(d);
      }
    }
    auto result = fuse_dataset(ctx.targets[i], ctx.native[i], foreign, p.fusion,
                               FuseOptions{p.threads});
    for (const auto& a : result.accepted) {
      if (!fill.count(a.category_id())) continue;
      run.accepted.push_back({a.image(), a.category_id(), a.bbox(), confidence_of(a.provenance())});
    }
    for (const auto& item : result.review) {
      const auto& a = item.candidate;
      if (!fill.count(a.category_id())) continue;
      ++run.review_queue;
      if (p.reviewer == ReviewerKind::kOracle && oracle_accepts(a, truth)) {
        ++run.oracle_accepted;
        run.reviewed.push_back({a.image(), a.category_id(), a.bbox(), item.payload().confidence});
      }
    }
  }
  return run;
}

inline MetricsReport score_run(const BenchContext& ctx, const std::vector<std::size_t>& sources,
                               const std::vector<EvalDetection>& preds) {
  std::vector<std::set<CategoryId>> fill(ctx.targets.size());
  for (std::size_t i = 0; i < ctx.targets.size(); ++i) fill[i] = fillable(ctx, i, sources);
  std::vector<Annotation> gt;
  for (const auto& a : ctx.world.truth.annotations()) {
    if (fill[ctx.dataset_of.at(a.image())].count(a.category_id())) gt.push_back(a);
  }
  return evaluate(ctx.unified.space, ctx.world.truth.images().size(), gt, preds, 0.5);
}

}  // namespace detail

inline BenchmarkReport run_benchmark(const BenchmarkParams& p) {
  p.noise.validate();
  detail::BenchContext ctx{generate_world(p.world), {}, {}, {}, {}, {}};
  const auto& world = ctx.world;

  std::vector<std::pair<std::string, LabelSpace>> spaces;
  for (const auto& d : world.visible) spaces.emplace_back(d.id(), d.label_space());
  ctx.unified = build_unified_space(spaces, AliasMap{});
  if (ctx.unified.space.names() != world.truth.label_space().names()) {
    fail(ErrorCode::kInvalidParams, "unified space does not match the world's class set");
  }
  for (std::size_t i = 0; i < world.visible.size(); ++i) {
    ctx.targets.push_back(remap_dataset(world.visible[i], ctx.unified.tables[i], ctx.unified.space));
    ctx.native.push_back(ctx.unified.tables[i].image());
    for (const auto& img : world.visible[i].images()) ctx.dataset_of[key_of(img)] = i;
  }

  std::vector<std::size_t> sources;
  if (p.detectors) {
    for (std::size_t j : *p.detectors) {
      if (j >= world.visible.size()) fail(ErrorCode::kInvalidParams, "detector index out of range");
    }
    sources = *p.detectors;
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  } else {
    for (std::size_t j = 0; j < world.visible.size(); ++j) sources.push_back(j);
  }
  if (sources.empty()) fail(ErrorCode::kInvalidParams, "no detectors");

  ctx.dets.resize(world.visible.size());
  for (std::size_t j : sources) {
    std::vector<ImageRecord> foreign_images;
    for (const auto& img : world.truth.images()) {
      if (ctx.dataset_of.at(key_of(img)) != j) foreign_images.push_back(img);
    }
    std::vector<Annotation> foreign_truth;
    for (const auto& a : world.truth.annotations()) {
      if (ctx.dataset_of.at(a.image()) != j) foreign_truth.push_back(a);
    }
    UnifiedDataset seen(world.truth.label_space(), std::move(foreign_images),
                        std::move(foreign_truth));
    auto raw = simulate_detector(seen, p.noise, world.visible[j].label_space(),
                                 "m_" + world.visible[j].id(), stream_seed(p.detector_seed, 3, j));
    ctx.dets[j] = remap_detections(raw, ctx.unified.tables[j]);
  }

  std::map<ImageKey, std::vector<const Annotation*>> truth_by_image;
  for (const auto& a : world.truth.annotations()) truth_by_image[a.image()].push_back(&a);

  BenchmarkReport report;
  report.class_count = ctx.unified.space.size();
  for (std::size_t j : sources) {
    const std::vector<std::size_t> only{j};
    auto run = detail::run_sources(ctx, only, p, truth_by_image);
    auto metrics = detail::score_run(ctx, only, run.accepted);
    report.single.push_back({"m_" + world.visible[j].id(), metrics.all.ap50, metrics.all.ap50_95,
                             run.accepted.size()});
  }
  auto run = detail::run_sources(ctx, sources, p, truth_by_image);
  auto fused = detail::score_run(ctx, sources, run.accepted);
  report.fused = {"fused", fused.all.ap50, fused.all.ap50_95, run.accepted.size()};
  report.review_queue = run.review_queue;
  report.oracle_accepted = run.oracle_accepted;
  if (p.reviewer == ReviewerKind::kOracle) {
    auto preds = run.accepted;
    preds.insert(preds.end(), run.reviewed.begin(), run.reviewed.end());
    auto reviewed = detail::score_run(ctx, sources, preds);
    report.reviewed = SourceScore{"fused+oracle_review", reviewed.all.ap50, reviewed.all.ap50_95,
                                  preds.size()};
  }
  return report;
}

inline std::string benchmark_report_text(const BenchmarkReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-24s %9s %9s %9s\n", "Pseudo labels", "mAP50", "mAP50-95",
                "labels");
  out << line;
  auto row = [&](const SourceScore& s) {
    std::snprintf(line, sizeof(line), "%-24s %9.4f %9.4f %9zu\n", s.model_id.c_str(), s.map50,
                  s.map50_95, s.accepted);
    out << line;
  };
  for (const auto& s : r.single) row(s);
  row(r.fused);
  if (r.reviewed) row(*r.reviewed);
  std::snprintf(line, sizeof(line), "review queue %zu, oracle accepted %zu, classes %zu\n",
                r.review_queue, r.oracle_accepted, r.class_count);
  out << line;
  return out.str();
}

inline std::string benchmark_report_json(const BenchmarkReport& r) {
  auto score = [](const SourceScore& s) {
    return nlohmann::ordered_json{{"source", s.model_id},
                                  {"map50", s.map50},
                                  {"map50_95", s.map50_95},
                                  {"labels", s.accepted}};
  };
  nlohmann::ordered_json j;
  nlohmann::ordered_json single = nlohmann::ordered_json::array();
  for (const auto& s : r.single) single.push_back(score(s));
  j["single"] = std::move(single);
  j["fused"] = score(r.fused);
  j["reviewed"] = r.reviewed ? score(*r.reviewed) : nlohmann::ordered_json(nullptr);
  j["review_queue"] = r.review_queue;
  j["oracle_accepted"] = r.oracle_accepted;
  j["class_count"] = r.class_count;
  return j.dump(1) + "\n";
}

}  // namespace labelfuse
