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

#include <gtest/gtest.h>

#include "labelfuse/metrics.hpp"
#include "labelfuse/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace labelfuse {
namespace {

using testing::Gen;

std::vector<ScoredBox> scored(std::initializer_list<std::pair<BoundingBox, double>> l) {
  std::vector<ScoredBox> out;
  for (const auto& [b, s] : l) out.push_back({b, s});
  return out;
}

TEST(MatchDetections, SingleTruePositive) {
  const std::vector<BoundingBox> gt = {BoundingBox(0, 0, 10, 10)};
  const auto m = match_detections(gt, scored({{BoundingBox(0, 0, 10, 10), 0.9}}), 0.5);
  ASSERT_EQ(m.detections.size(), 1u);
  EXPECT_TRUE(m.detections[0].is_tp);
  EXPECT_EQ(m.detections[0].gt, std::size_t{0});
  EXPECT_TRUE(m.gt_covered[0]);
}

TEST(MatchDetections, OneMatchPerGt) {
  const std::vector<BoundingBox> gt = {BoundingBox(0, 0, 10, 10)};
  const auto m = match_detections(
      gt, scored({{BoundingBox(0, 0, 10, 9), 0.8}, {BoundingBox(0, 0, 10, 10), 0.9}}), 0.5);
  EXPECT_EQ(m.detections[0].detection, 1u);
  EXPECT_TRUE(m.detections[0].is_tp);
  EXPECT_FALSE(m.detections[1].is_tp);
}

TEST(MatchDetections, CrossOverlapMatchesProtocolOracle) {
  Gen g(51);
  for (int i = 0; i < 2000; ++i) {
    std::vector<BoundingBox> gt;
    std::vector<oracle::GtBox> ogt;
    for (std::size_t k = 0, n = g.index(5) + 1; k < n; ++k) {
      gt.push_back(g.box_in(40, 40));
      ogt.push_back({"i", 0, gt.back().x(), gt.back().y(), gt.back().w(), gt.back().h()});
    }
    std::vector<ScoredBox> dets;
    std::vector<oracle::DetBox> odets;
    for (std::size_t k = 0, n = g.index(5) + 1; k < n; ++k) {
      const double s = g.coin(0.2) ? 0.5 : g.real(0, 1);
      dets.push_back({g.box_in(40, 40), s});
      const auto& b = dets.back().bbox;
      odets.push_back({"i", 0, b.x(), b.y(), b.w(), b.h(), s});
    }
    const double thr = g.real(0.1, 0.9);
    const auto m = match_detections(gt, dets, thr);
    const auto tp = oracle::greedy_tp(ogt, odets, 0, thr);
    for (const auto& dm : m.detections) EXPECT_EQ(dm.is_tp, tp[dm.detection]);
  }
}

TEST(PrCurve, Examples) {
  const std::vector<ScoredOutcome> one = {{0.9, true}};
  EXPECT_EQ(pr_curve(one, 1).points, (std::vector<PrPoint>{{1.0, 1.0}}));
  const std::vector<ScoredOutcome> two = {{0.9, true}, {0.8, false}};
  EXPECT_EQ(pr_curve(two, 1).points, (std::vector<PrPoint>{{1.0, 1.0}, {1.0, 0.5}}));
  EXPECT_TRUE(pr_curve({}, 0).zero_gt);
}

TEST(PrCurve, CumulativeSumOracle) {
  Gen g(52);
  for (int i = 0; i < 200; ++i) {
    std::vector<ScoredOutcome> o;
    for (int k = 0; k < 10; ++k) o.push_back({g.real(0, 1), g.coin()});
    const std::size_t total = 10 + g.index(5);
    const auto curve = pr_curve(o, total);
    std::vector<ScoredOutcome> sorted = o;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ScoredOutcome& a, const ScoredOutcome& b) { return a.score > b.score; });
    int tp = 0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      tp += sorted[k].is_tp;
      EXPECT_EQ(curve.points[k].recall, static_cast<double>(tp) / total);
      EXPECT_EQ(curve.points[k].precision, static_cast<double>(tp) / (k + 1));
    }
  }
}

TEST(AveragePrecision, Examples) {
  const std::vector<PrPoint> perfect = {{1.0, 1.0}};
  EXPECT_DOUBLE_EQ(average_precision(perfect), 1.0);
  EXPECT_EQ(average_precision({}), 0.0);
  const std::vector<PrPoint> tp_fp = {{1.0, 1.0}, {1.0, 0.5}};
  EXPECT_DOUBLE_EQ(average_precision(tp_fp), 1.0);
  // half recall at full precision: recall levels 0..0.5 inclusive, 51 of 101
  const std::vector<PrPoint> half = {{0.5, 1.0}};
  EXPECT_NEAR(average_precision(half), 51.0 / 101.0, 1e-15);
}

TEST(AveragePrecision, DirectSummationOracle) {
  Gen g(53);
  for (int i = 0; i < 500; ++i) {
    std::vector<oracle::DetBox> dets;
    std::vector<bool> tp;
    std::vector<ScoredOutcome> o;
    const int n_gt = g.integer(1, 8);
    int hits = 0;
    for (int k = 0, n = g.integer(0, 12); k < n; ++k) {
      const bool t = hits < n_gt && g.coin();
      hits += t;
      const double s = g.real(0, 1);
      dets.push_back({"i", 0, 0, 0, 1, 1, s});
      tp.push_back(t);
      o.push_back({s, t});
    }
    EXPECT_NEAR(average_precision(pr_curve(o, n_gt).points), oracle::brute_ap(dets, tp, 0, n_gt), 1e-12);
  }
}

// ---------------------------------------------------------------------------

TEST(Evaluate, PerfectDetector) {
  const ImageRecord img("1", "gt", "a.png", 100, 100);
  const Dataset gt("gt", LabelSpace::from_names({"car"}), {img},
                   {Annotation(key_of(img), 0, BoundingBox(10, 10, 20, 20))});
  const auto r = evaluate(gt, {Detection("1", 0, BoundingBox(10, 10, 20, 20), 0.9, "m")}, 0.5);
  for (const auto* m : {&r.classes[0], &r.all}) {
    EXPECT_DOUBLE_EQ(m->precision, 1.0);
    EXPECT_DOUBLE_EQ(m->recall, 1.0);
    EXPECT_DOUBLE_EQ(m->f1, 1.0);
    EXPECT_DOUBLE_EQ(m->ap50, 1.0);
    EXPECT_DOUBLE_EQ(m->ap50_95, 1.0);
  }
}

TEST(Evaluate, NoDetections) {
  const ImageRecord img("1", "gt", "a.png", 100, 100);
  const Dataset gt("gt", LabelSpace::from_names({"car"}), {img},
                   {Annotation(key_of(img), 0, BoundingBox(10, 10, 20, 20))});
  const auto r = evaluate(gt, {}, 0.5);
  EXPECT_EQ(r.all.precision, 0.0);
  EXPECT_EQ(r.all.recall, 0.0);
  EXPECT_EQ(r.all.f1, 0.0);
  EXPECT_EQ(r.all.ap50, 0.0);
  EXPECT_EQ(r.all.ap50_95, 0.0);
}

TEST(Evaluate, ZeroGtClassExcludedFromMeans) {
  const ImageRecord img("1", "gt", "a.png", 100, 100);
  const Dataset gt("gt", LabelSpace::from_names({"car", "bus"}), {img},
                   {Annotation(key_of(img), 0, BoundingBox(10, 10, 20, 20))});
  const auto r = evaluate(gt, {Detection("1", 0, BoundingBox(10, 10, 20, 20), 0.9, "m"),
                               Detection("1", 1, BoundingBox(50, 50, 20, 20), 0.9, "m")},
                          0.5);
  EXPECT_TRUE(r.classes[1].zero_gt);
  EXPECT_DOUBLE_EQ(r.all.ap50, 1.0);
  EXPECT_EQ(r.all.det_count, 2u);
  const std::string text = metrics_report_text(r);
  for (const char* col : {"Class", "Precision", "Recall", "F1", "mAP50", "mAP50-95"}) {
    EXPECT_NE(text.find(col), std::string::npos) << col;
  }
  const auto j = nlohmann::json::parse(metrics_report_json(r));
  EXPECT_EQ(j["all"]["map50"], 1.0);
}

TEST(Evaluate, Errors) {
  const Dataset empty("gt", LabelSpace::from_names({"car"}), {}, {});
  try {
    evaluate(empty, {}, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
  const ImageRecord img("1", "gt", "a.png", 100, 100);
  const Dataset gt("gt", LabelSpace::from_names({"car"}), {img}, {});
  EXPECT_THROW(evaluate(gt, {Detection("2", 0, BoundingBox(1, 1, 1, 1), 0.5, "m")}, 0.5), Error);
}

// Converts to the oracle's plain structs and compares every reported value.
void expect_matches_oracle(const LabelSpace& space, const std::vector<ImageRecord>& images,
                           const std::vector<Annotation>& gt, const std::vector<EvalDetection>& dets,
                           double thr) {
  std::vector<oracle::GtBox> ogt;
  for (const auto& a : gt) {
    ogt.push_back({a.image().dataset + "/" + a.image().image_id, static_cast<int>(a.category_id()),
                   a.bbox().x(), a.bbox().y(), a.bbox().w(), a.bbox().h()});
  }
  std::vector<oracle::DetBox> odets;
  for (const auto& d : dets) {
    odets.push_back({d.image.dataset + "/" + d.image.image_id, static_cast<int>(d.category),
                     d.bbox.x(), d.bbox.y(), d.bbox.w(), d.bbox.h(), d.score});
  }
  const auto r = evaluate(space, images.size(), gt, dets, thr);
  const auto o = oracle::brute_evaluate(static_cast<int>(space.size()), ogt, odets, thr);
  auto cmp = [](const ClassMetrics& m, const oracle::ClassResult& e) {
    EXPECT_NEAR(m.precision, e.precision, 1e-9);
    EXPECT_NEAR(m.recall, e.recall, 1e-9);
    EXPECT_NEAR(m.f1, e.f1, 1e-9);
    EXPECT_NEAR(m.ap50, e.ap50, 1e-9);
    EXPECT_NEAR(m.ap50_95, e.ap50_95, 1e-9);
  };
  for (std::size_t c = 0; c < space.size(); ++c) cmp(r.classes[c], o.classes[c]);
  cmp(r.all, o.all);
}

TEST(EvaluateProperty, SmallInstancesMatchBruteForce) {
  Gen g(54);
  for (int i = 0; i < 300; ++i) {
    const std::size_t k = g.index(3) + 1;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
    const LabelSpace space = LabelSpace::from_names(names);
    std::vector<ImageRecord> images;
    for (std::size_t n = 0, m = g.index(2) + 1; n < m; ++n) images.emplace_back(std::to_string(n), "d", "x", 30, 30);
    std::vector<Annotation> gt;
    for (std::size_t n = 0, m = g.index(6); n < m; ++n) {
      gt.emplace_back(key_of(images[g.index(images.size())]), static_cast<CategoryId>(g.index(k)),
                      g.box_in(30, 30));
    }
    std::vector<EvalDetection> dets;
    for (std::size_t n = 0, m = g.index(6); n < m; ++n) {
      // half the detections perturb a GT box so matches actually happen
      const ImageRecord& img = images[g.index(images.size())];
      BoundingBox b = g.box_in(30, 30);
      if (!gt.empty() && g.coin()) {
        const auto& src = gt[g.index(gt.size())].bbox();
        b = BoundingBox(src.x() + g.real(0, 2), src.y() + g.real(0, 2), src.w(), src.h());
      }
      const double s = g.coin(0.2) ? 0.5 : g.real(0, 1);
      dets.push_back({key_of(img), static_cast<CategoryId>(g.index(k)), b, s});
    }
    expect_matches_oracle(space, images, gt, dets, g.real(0, 1));
  }
}

TEST(EvaluateProperty, SeededSyntheticSetMatchesBruteForce) {
  WorldParams wp;
  wp.n_datasets = 1;
  wp.classes_per_dataset = 5;
  wp.overlap_classes = 0;
  wp.images = 50;
  const World w = generate_world(wp);
  const auto dets = simulate_detector(w.truth, DetectorNoiseModel{}, w.truth.label_space(), "m", 9);
  std::vector<EvalDetection> samples;
  for (const auto& d : dets) samples.push_back({{"ds0", d.image_id()}, d.category_id(), d.bbox(), d.score()});
  expect_matches_oracle(w.truth.label_space(), w.truth.images(), w.truth.annotations(), samples, 0.5);
}

TEST(EvaluateProperty, ApInvariants) {
  Gen g(55);
  const LabelSpace space = LabelSpace::from_names({"a"});
  const std::vector<ImageRecord> images = {ImageRecord("0", "d", "x", 50, 50)};
  for (int i = 0; i < 300; ++i) {
    std::vector<Annotation> gt;
    for (std::size_t n = 0, m = g.index(5) + 1; n < m; ++n) gt.emplace_back(key_of(images[0]), 0, g.box_in(50, 50));
    std::vector<EvalDetection> dets;
    for (std::size_t n = 0, m = g.index(6); n < m; ++n) {
      const auto& src = gt[g.index(gt.size())].bbox();
      const BoundingBox b = g.coin() ? src : g.box_in(50, 50);
      dets.push_back({key_of(images[0]), 0, b, g.real(0.01, 0.99)});
    }
    const auto base = evaluate(space, 1, gt, dets, 0.5).classes[0];
    EXPECT_LE(base.ap50_95, base.ap50 + 1e-15);

    // strictly monotone transform of scores
    auto transformed = dets;
    for (auto& d : transformed) d.score = d.score * d.score * 0.5;
    EXPECT_NEAR(evaluate(space, 1, gt, transformed, 0.0).classes[0].ap50, base.ap50, 1e-15);

    // an extra false positive (lowest score, far outside all GT) never helps
    auto with_fp = dets;
    with_fp.push_back({key_of(images[0]), 0, BoundingBox(49, 49, 0.5, 0.5), 0.001});
    EXPECT_LE(evaluate(space, 1, gt, with_fp, 0.5).classes[0].ap50, base.ap50 + 1e-15);

    // a true positive at the top, for a GT nothing matched yet, never hurts
    std::vector<BoundingBox> gt_boxes;
    for (const auto& a : gt) gt_boxes.push_back(a.bbox());
    std::vector<ScoredBox> boxes;
    for (const auto& d : dets) boxes.push_back({d.bbox, d.score});
    const auto m = match_detections(gt_boxes, boxes, 0.5);
    const auto free_gt = std::find(m.gt_covered.begin(), m.gt_covered.end(), false);
    if (free_gt == m.gt_covered.end()) continue;
    auto with_tp = dets;
    with_tp.insert(with_tp.begin(),
                   {key_of(images[0]), 0, gt_boxes[free_gt - m.gt_covered.begin()], 1.0});
    EXPECT_GE(evaluate(space, 1, gt, with_tp, 0.5).classes[0].ap50, base.ap50 - 1e-15);
  }
}

TEST(EvaluateProperty, DuplicatesCountOnce) {
  const ImageRecord img("0", "d", "x", 50, 50);
  const std::vector<Annotation> gt = {Annotation(key_of(img), 0, BoundingBox(5, 5, 10, 10))};
  std::vector<EvalDetection> dets(7, EvalDetection{key_of(img), 0, BoundingBox(5, 5, 10, 10), 0.9});
  const auto r = evaluate(LabelSpace::from_names({"a"}), 1, gt, dets, 0.5);
  EXPECT_DOUBLE_EQ(r.classes[0].recall, 1.0);
  EXPECT_DOUBLE_EQ(r.classes[0].precision, 1.0 / 7.0);
}

}  // namespace
}  // namespace labelfuse
