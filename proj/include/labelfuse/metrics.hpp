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

// COCO-protocol detection metrics: greedy score-ordered matching,
// 101-point interpolated AP at IoU 0.5 and averaged over IoU 0.50:0.95,
// plus precision / recall / F1 at a fixed score threshold.
//
// Ties in score are broken by input order everywhere.

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "labelfuse/core.hpp"
#include "labelfuse/geometry.hpp"

namespace labelfuse {

struct ScoredBox {
  BoundingBox bbox;
  double score;
};

struct DetectionMatch {
  std::size_t detection;            // index into the input detections
  double score;
  std::optional<std::size_t> gt;    // index into the input ground truth
  bool is_tp = false;
};

struct MatchResult {
  std::vector<DetectionMatch> detections;  // score-descending
  std::vector<bool> gt_covered;
};

inline MatchResult match_detections(std::span<const BoundingBox> gt,
                                    std::span<const ScoredBox> dets, double iou_thr) {
  MatchResult result;
  result.gt_covered.assign(gt.size(), false);
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  result.detections.reserve(dets.size());
  for (std::size_t d : order) {
    DetectionMatch m{d, dets[d].score, std::nullopt, false};
    double best = 0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (result.gt_covered[g]) continue;
      const double v = iou(gt[g], dets[d].bbox);
      if (v >= iou_thr && (!m.gt || v > best)) {
        m.gt = g;
        best = v;
      }
    }
    if (m.gt) {
      m.is_tp = true;
      result.gt_covered[*m.gt] = true;
    }
    result.detections.push_back(m);
  }
  return result;
}

struct PrPoint {
  double recall;
  double precision;
  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

struct PrCurve {
  std::vector<PrPoint> points;
  bool zero_gt = false;  // class has no ground truth; excluded from means
};

struct ScoredOutcome {
  double score;
  bool is_tp;
};

inline PrCurve pr_curve(std::span<const ScoredOutcome> outcomes, std::size_t total_gt) {
  std::vector<std::size_t> order(outcomes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outcomes[a].score > outcomes[b].score;
  });
  PrCurve curve;
  curve.zero_gt = total_gt == 0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i : order) {
    (outcomes[i].is_tp ? tp : fp) += 1;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall =
        total_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(total_gt);
    curve.points.push_back({recall, precision});
  }
  return curve;
}

// Recall grid 0, 0.01, ..., 1.00 computed as i * 0.01 (the values numpy's
// linspace yields, so results line up with pycocotools).
inline double average_precision(std::span<const PrPoint> points) {
  if (points.empty()) return 0.0;
  std::vector<double> envelope(points.size());
  double running = 0;
  for (std::size_t i = points.size(); i-- > 0;) {
    running = std::max(running, points[i].precision);
    envelope[i] = running;
  }
  double sum = 0;
  std::size_t idx = 0;
  for (int i = 0; i <= 100; ++i) {
    const double r = i * 0.01;
    while (idx < points.size() && points[idx].recall < r) ++idx;
    if (idx == points.size()) break;
    sum += envelope[idx];
  }
  return sum / 101.0;
}

inline std::vector<double> coco_iou_thresholds() {
  std::vector<double> t(10);
  const double step = (0.95 - 0.5) / 9;
  for (int i = 0; i < 10; ++i) t[i] = i * step + 0.5;
  return t;
}

struct ClassMetrics {
  std::string name;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double ap50 = 0;
  double ap50_95 = 0;
  std::size_t gt_count = 0;
  std::size_t det_count = 0;
  bool zero_gt = false;
};

struct MetricsReport {
  std::vector<ClassMetrics> classes;  // indexed by category id
  ClassMetrics all;                   // unweighted mean over classes with ground truth
  double score_threshold = 0.5;
};

inline double f1_score(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

// Detection input for the generic evaluator.
struct EvalDetection {
  ImageKey image;
  CategoryId category;
  BoundingBox bbox;
  double score;
};

inline MetricsReport evaluate(const LabelSpace& space, std::size_t image_count,
                              std::span<const Annotation> gt,
                              std::span<const EvalDetection> dets, double score_thr_f1) {
  if (image_count == 0) fail(ErrorCode::kEmptyDataset, "ground truth has no images");
  const std::size_t k = space.size();
  using PerImage = std::map<ImageKey, std::vector<std::size_t>>;
  std::vector<PerImage> gt_by_class(k), det_by_class(k);
  std::vector<std::vector<std::size_t>> det_order_by_class(k);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!space.contains(gt[i].category_id())) {
      fail(ErrorCode::kUnknownCategory, "ground-truth category " + std::to_string(gt[i].category_id()));
    }
    gt_by_class[gt[i].category_id()][gt[i].image()].push_back(i);
  }
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!space.contains(dets[i].category)) {
      fail(ErrorCode::kUnknownCategory, "detection category " + std::to_string(dets[i].category));
    }
    det_by_class[dets[i].category][dets[i].image].push_back(i);
    det_order_by_class[dets[i].category].push_back(i);
  }

  const auto thresholds = coco_iou_thresholds();
  MetricsReport report;
  report.score_threshold = score_thr_f1;
  report.classes.resize(k);
  std::size_t counted = 0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics& m = report.classes[c];
    m.name = space.name(static_cast<CategoryId>(c));
    for (const auto& [_, v] : gt_by_class[c]) m.gt_count += v.size();
    m.det_count = det_order_by_class[c].size();
    m.zero_gt = m.gt_count == 0;

    // outcome per detection index, per threshold
    std::vector<std::map<std::size_t, bool>> tp_at(thresholds.size());
    for (const auto& [image, det_ids] : det_by_class[c]) {
      std::vector<BoundingBox> gt_boxes;
      if (auto it = gt_by_class[c].find(image); it != gt_by_class[c].end()) {
        for (std::size_t g : it->second) gt_boxes.push_back(gt[g].bbox());
      }
      std::vector<ScoredBox> boxes;
      for (std::size_t d : det_ids) boxes.push_back({dets[d].bbox, dets[d].score});
      for (std::size_t t = 0; t < thresholds.size(); ++t) {
        auto match = match_detections(gt_boxes, boxes, thresholds[t]);
        for (const auto& dm : match.detections) tp_at[t][det_ids[dm.detection]] = dm.is_tp;
      }
    }

    double ap_sum = 0;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      std::vector<ScoredOutcome> outcomes;
      for (std::size_t d : det_order_by_class[c]) outcomes.push_back({dets[d].score, tp_at[t][d]});
      const double ap = m.zero_gt ? 0.0 : average_precision(pr_curve(outcomes, m.gt_count).points);
      if (t == 0) m.ap50 = ap;
      ap_sum += ap;
    }
    m.ap50_95 = ap_sum / static_cast<double>(thresholds.size());

    std::size_t tp = 0, kept = 0;
    for (std::size_t d : det_order_by_class[c]) {
      if (dets[d].score >= score_thr_f1) {
        ++kept;
        tp += tp_at[0][d] ? 1 : 0;
      }
    }
    m.precision = kept == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(kept);
    m.recall = m.zero_gt ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.gt_count);
    m.f1 = f1_score(m.precision, m.recall);

    report.all.gt_count += m.gt_count;
    report.all.det_count += m.det_count;
    if (!m.zero_gt) {
      ++counted;
      report.all.precision += m.precision;
      report.all.recall += m.recall;
      report.all.f1 += m.f1;
      report.all.ap50 += m.ap50;
      report.all.ap50_95 += m.ap50_95;
    }
  }
  report.all.name = "all";
  report.all.zero_gt = counted == 0;
  if (counted > 0) {
    const double n = static_cast<double>(counted);
    report.all.precision /= n;
    report.all.recall /= n;
    report.all.f1 /= n;
    report.all.ap50 /= n;
    report.all.ap50_95 /= n;
  }
  return report;
}

inline MetricsReport evaluate(const Dataset& gt, const std::vector<Detection>& dets,
                              double score_thr_f1) {
  std::vector<EvalDetection> samples;
  samples.reserve(dets.size());
  for (const auto& d : dets) {
    if (!gt.find_image(d.image_id())) {
      fail(ErrorCode::kUnknownImage, "detection for unknown image '" + d.image_id() + "'");
    }
    samples.push_back({ImageKey{gt.id(), d.image_id()}, d.category_id(), d.bbox(), d.score()});
  }
  return evaluate(gt.label_space(), gt.images().size(), gt.annotations(), samples, score_thr_f1);
}

inline nlohmann::ordered_json class_metrics_to_json(const ClassMetrics& m) {
  return {{"class", m.name},          {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},               {"map50", m.ap50},          {"map50_95", m.ap50_95},
          {"gt_count", m.gt_count},   {"det_count", m.det_count}, {"zero_gt", m.zero_gt}};
}

inline std::string metrics_report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["score_threshold"] = r.score_threshold;
  j["all"] = class_metrics_to_json(r.all);
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& c : r.classes) classes.push_back(class_metrics_to_json(c));
  j["classes"] = std::move(classes);
  return j.dump(1) + "\n";
}

inline std::string metrics_report_text(const MetricsReport& r) {
  std::ostringstream out;
  char line[192];
  std::snprintf(line, sizeof(line), "%-16s %9s %9s %9s %9s %9s %8s %8s\n", "Class", "Precision",
                "Recall", "F1", "mAP50", "mAP50-95", "GT", "Dets");
  out << line;
  auto row = [&](const ClassMetrics& m) {
    std::snprintf(line, sizeof(line), "%-16s %9.3f %9.3f %9.3f %9.3f %9.3f %8zu %8zu%s\n",
                  m.name.c_str(), m.precision, m.recall, m.f1, m.ap50, m.ap50_95, m.gt_count,
                  m.det_count, m.zero_gt ? "  (no GT, excluded)" : "");
    out << line;
  };
  row(r.all);
  for (const auto& c : r.classes) row(c);
  std::snprintf(line, sizeof(line), "F1/precision/recall at score >= %.3f, IoU 0.50\n",
                r.score_threshold);
  out << line;
  return out.str();
}

}  // namespace labelfuse
