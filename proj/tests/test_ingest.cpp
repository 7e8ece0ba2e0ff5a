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

#include "labelfuse/ingest.hpp"
#include "support.hpp"

namespace labelfuse {
namespace {

using testing::Gen;
using testing::TempDir;
using testing::write_text;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

const char* kMinimal = R"({
  "images": [{"id": 1, "file_name": "a.png", "width": 100, "height": 80}],
  "annotations": [{"id": 1, "image_id": 1, "category_id": 1, "bbox": [10, 10, 20, 20]}],
  "categories": [{"id": 1, "name": "car"}]
})";

TEST(ParseCoco, Minimal) {
  const Dataset d = parse_coco_dataset(kMinimal, "streets");
  EXPECT_EQ(d.label_space().names(), std::vector<std::string>{"car"});
  ASSERT_EQ(d.annotations().size(), 1u);
  const auto& a = d.annotations()[0];
  EXPECT_EQ(a.image(), (ImageKey{"streets", "1"}));
  EXPECT_EQ(a.bbox(), BoundingBox(10, 10, 20, 20));
  EXPECT_TRUE(std::holds_alternative<GroundTruth>(a.provenance()));
}

TEST(ParseCoco, SparseCategoryIdsBecomeDense) {
  const char* doc = R"({
    "images": [{"id": 5, "file_name": "a.png", "width": 100, "height": 100}],
    "annotations": [
      {"id": 1, "image_id": 5, "category_id": 7, "bbox": [1, 1, 2, 2]},
      {"id": 2, "image_id": 5, "category_id": 3, "bbox": [3, 3, 2, 2]}],
    "categories": [{"id": 3, "name": "Bus"}, {"id": 7, "name": "truck"}]
  })";
  const Dataset d = parse_coco_dataset(doc, "x");
  // position in category list order
  EXPECT_EQ(d.label_space().names(), (std::vector<std::string>{"bus", "truck"}));
  EXPECT_EQ(d.annotations()[0].category_id(), 1u);
  EXPECT_EQ(d.annotations()[1].category_id(), 0u);
}

TEST(ParseCoco, DanglingImage) {
  const char* doc = R"({
    "images": [{"id": 1, "file_name": "a.png", "width": 100, "height": 100}],
    "annotations": [{"id": 1, "image_id": 99, "category_id": 1, "bbox": [1, 1, 2, 2]}],
    "categories": [{"id": 1, "name": "car"}]
  })";
  EXPECT_EQ(code_of([&] { parse_coco_dataset(doc, "x"); }), ErrorCode::kDanglingRef);
}

TEST(ParseCoco, DanglingCategory) {
  const char* doc = R"({
    "images": [{"id": 1, "file_name": "a.png", "width": 100, "height": 100}],
    "annotations": [{"id": 1, "image_id": 1, "category_id": 4, "bbox": [1, 1, 2, 2]}],
    "categories": [{"id": 1, "name": "car"}]
  })";
  EXPECT_EQ(code_of([&] { parse_coco_dataset(doc, "x"); }), ErrorCode::kDanglingRef);
}

TEST(ParseCoco, MalformedReportsPosition) {
  try {
    parse_coco_dataset("{\n  \"images\": [,]\n}", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ParseCoco, MissingFieldIsNamed) {
  const char* doc = R"({"images": [{"id": 1, "file_name": "a", "height": 3}], "annotations": [], "categories": []})";
  try {
    parse_coco_dataset(doc, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
    EXPECT_NE(std::string(e.what()).find("width"), std::string::npos) << e.what();
  }
}

TEST(ParseCoco, ClampsAndDrops) {
  const char* doc = R"({
    "images": [{"id": 1, "file_name": "a.png", "width": 50, "height": 50}],
    "annotations": [
      {"id": 1, "image_id": 1, "category_id": 1, "bbox": [40, 40, 20, 20]},
      {"id": 2, "image_id": 1, "category_id": 1, "bbox": [60, 60, 5, 5]}],
    "categories": [{"id": 1, "name": "car"}]
  })";
  ParseReport report;
  const Dataset d = parse_coco_dataset(doc, "x", &report);
  ASSERT_EQ(d.annotations().size(), 1u);
  EXPECT_EQ(d.annotations()[0].bbox(), BoundingBox(40, 40, 10, 10));
  EXPECT_EQ(report.clamped, 1u);
  EXPECT_EQ(report.dropped, 1u);
}

// ---------------------------------------------------------------------------

void make_yolo(const TempDir& dir, const std::string& sizes, const std::string& label) {
  write_text(dir / "sizes.tsv", sizes);
  write_text(dir / "labels/a.txt", label);
}

TEST(ParseYolo, CenterToCorner) {
  TempDir dir;
  make_yolo(dir, "a\t100\t100\n", "0 0.5 0.5 0.5 0.5\n");
  const Dataset d = parse_yolo_dataset(dir.path(), {"car", "person", "rider"}, "roads");
  ASSERT_EQ(d.annotations().size(), 1u);
  // x = (cx - w/2) * W
  EXPECT_EQ(d.annotations()[0].bbox(), BoundingBox(25, 25, 50, 50));
  EXPECT_EQ(d.label_space().name(d.annotations()[0].category_id()), "car");
}

TEST(ParseYolo, FullImageBox) {
  TempDir dir;
  make_yolo(dir, "a\t64\t64\n", "0 0.5 0.5 1.0 1.0\n");
  const Dataset d = parse_yolo_dataset(dir.path(), {"car"}, "roads");
  EXPECT_EQ(d.annotations()[0].bbox(), BoundingBox(0, 0, 64, 64));
}

TEST(ParseYolo, ClassIndexOutOfRange) {
  TempDir dir;
  make_yolo(dir, "a\t64\t64\n", "5 0.5 0.5 0.2 0.2\n");
  EXPECT_EQ(code_of([&] { parse_yolo_dataset(dir.path(), {"a", "b", "c"}, "r"); }),
            ErrorCode::kIndexOutOfRange);
}

TEST(ParseYolo, MissingDimensions) {
  TempDir dir;
  make_yolo(dir, "b\t64\t64\n", "0 0.5 0.5 0.2 0.2\n");
  EXPECT_EQ(code_of([&] { parse_yolo_dataset(dir.path(), {"a"}, "r"); }),
            ErrorCode::kMissingDimensions);
}

TEST(ParseYolo, MalformedLine) {
  TempDir dir;
  make_yolo(dir, "a\t64\t64\n", "0 0.5 0.5 0.2\n");
  EXPECT_EQ(code_of([&] { parse_yolo_dataset(dir.path(), {"a"}, "r"); }), ErrorCode::kParseError);
  make_yolo(dir, "a\t64\t64\n", "0 0.5 0.5 0.2 1.5\n");
  EXPECT_EQ(code_of([&] { parse_yolo_dataset(dir.path(), {"a"}, "r"); }), ErrorCode::kParseError);
}

TEST(ParseYolo, ImageFilePathFollowsExtension) {
  TempDir dir;
  make_yolo(dir, "a\t64\t64\nb\t32\t32\n", "");
  write_text(dir / "images/a.png", "x");
  const Dataset d = parse_yolo_dataset(dir.path(), {"a"}, "r");
  ASSERT_EQ(d.images().size(), 2u);
  EXPECT_EQ(d.images()[0].file_path(), "images/a.png");
  EXPECT_EQ(d.images()[1].file_path(), "images/b.jpg");
  EXPECT_TRUE(d.annotations().empty());
}

TEST(YoloConversion, CornerCenterCornerRoundTrip) {
  Gen g(21);
  for (int i = 0; i < 10000; ++i) {
    const int w = g.integer(1, 4000), h = g.integer(1, 4000);
    const BoundingBox b = g.box_in(w, h);
    const BoxCoords back = from_yolo(to_yolo(b, w, h), w, h);
    auto rel = [](double a, double e) { return std::abs(a - e) / std::max(1.0, std::abs(e)); };
    EXPECT_LE(rel(back.x, b.x()), 1e-9);
    EXPECT_LE(rel(back.y, b.y()), 1e-9);
    EXPECT_LE(rel(back.w, b.w()), 1e-9);
    EXPECT_LE(rel(back.h, b.h()), 1e-9);
  }
}

// ---------------------------------------------------------------------------

TEST(ParseDetections, Single) {
  const auto space = LabelSpace::from_names({"car"});
  const auto dets = parse_detections(
      R"([{"image_id": "a", "category_id": 0, "bbox": [1, 1, 5, 5], "score": 0.9}])", "m1", space);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].model_id(), "m1");
  EXPECT_EQ(dets[0].image_id(), "a");
  EXPECT_EQ(dets[0].score(), 0.9);
  EXPECT_EQ(dets[0].bbox(), BoundingBox(1, 1, 5, 5));
}

TEST(ParseDetections, Errors) {
  const auto space = LabelSpace::from_names({"car"});
  EXPECT_EQ(code_of([&] {
              parse_detections(R"([{"image_id": 1, "category_id": 0, "bbox": [1, 1, 5, 5], "score": 1.5}])",
                               "m", space);
            }),
            ErrorCode::kScoreOutOfRange);
  EXPECT_EQ(code_of([&] {
              parse_detections(R"([{"image_id": 1, "category_id": 1, "bbox": [1, 1, 5, 5], "score": 0.5}])",
                               "m", space);
            }),
            ErrorCode::kUnknownCategory);
  EXPECT_EQ(code_of([&] { parse_detections("[{", "m", space); }), ErrorCode::kParseError);
  EXPECT_TRUE(parse_detections("[]", "m", space).empty());
}

TEST(ParseDetections, TrimsNegativeOrigin) {
  const auto space = LabelSpace::from_names({"car"});
  ParseReport report;
  const auto dets = parse_detections(
      R"([{"image_id": 1, "category_id": 0, "bbox": [-2, 3, 5, 5], "score": 0.5},
          {"image_id": 1, "category_id": 0, "bbox": [-6, 3, 5, 5], "score": 0.5}])",
      "m", space, &report);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].bbox(), BoundingBox(0, 3, 3, 5));
  EXPECT_EQ(report.dropped, 1u);
}

// ---------------------------------------------------------------------------

TEST(ExportCoco, Empty) {
  const UnifiedDataset u(LabelSpace::from_names({"car", "person"}), {}, {});
  const auto doc = nlohmann::json::parse(export_coco(u));
  EXPECT_TRUE(doc["images"].empty());
  EXPECT_TRUE(doc["annotations"].empty());
  ASSERT_EQ(doc["categories"].size(), 2u);
  EXPECT_EQ(doc["categories"][1]["name"], "person");
}

TEST(ExportCoco, SourceFields) {
  const ImageRecord img("7", "streets", "a.png", 100, 100);
  const UnifiedDataset u(LabelSpace::from_names({"car"}), {img},
                         {Annotation(key_of(img), 0, BoundingBox(1, 1, 5, 5)),
                          Annotation(key_of(img), 0, BoundingBox(2, 2, 5, 5), Pseudo{"m1+m2", 0.8})});
  const auto doc = nlohmann::json::parse(export_coco(u));
  ASSERT_EQ(doc["annotations"].size(), 2u);
  EXPECT_EQ(doc["annotations"][0]["source"], "gt");
  EXPECT_FALSE(doc["annotations"][0].contains("confidence"));
  EXPECT_EQ(doc["annotations"][1]["source"], "pseudo");
  EXPECT_EQ(doc["annotations"][1]["model_id"], "m1+m2");
  EXPECT_EQ(doc["annotations"][1]["confidence"], 0.8);
  EXPECT_EQ(doc["images"][0]["source_dataset"], "streets");
  EXPECT_EQ(doc["images"][0]["source_image_id"], "7");
}

TEST(ExportCoco, PlainCocoReaderSeesSameBoxes) {
  Gen g(22);
  const UnifiedDataset u = testing::random_unified(g);
  const Dataset d = parse_coco_dataset(export_coco(u), "flat");
  ASSERT_EQ(d.annotations().size(), u.annotations().size());
  EXPECT_EQ(d.label_space().names(), u.label_space().names());
  for (std::size_t i = 0; i < d.annotations().size(); ++i) {
    EXPECT_EQ(d.annotations()[i].bbox(), u.annotations()[i].bbox());
    EXPECT_EQ(d.annotations()[i].category_id(), u.annotations()[i].category_id());
  }
}

TEST(RoundTripProperty, ParseExportIsIdentity) {
  Gen g(23);
  for (int i = 0; i < 500; ++i) {
    const UnifiedDataset u = testing::random_unified(g);
    const std::string doc = export_coco(u);
    const UnifiedDataset back = parse_unified_coco(doc);
    ASSERT_EQ(back, u) << doc;
    EXPECT_EQ(export_coco(back), doc);
  }
}

TEST(RoundTripProperty, LabelSpaceDocument) {
  Gen g(24);
  for (int i = 0; i < 200; ++i) {
    const auto space = testing::random_unified(g).label_space();
    EXPECT_EQ(label_space_from_json(label_space_to_json(space)), space);
  }
}

TEST(FuzzProperty, ParsersOnlyRaiseTypedErrors) {
  Gen g(25);
  const auto space = LabelSpace::from_names({"car", "person"});
  std::vector<std::string> seeds;
  for (int i = 0; i < 20; ++i) seeds.push_back(export_coco(testing::random_unified(g)));
  seeds.push_back(kMinimal);
  seeds.push_back(R"([{"image_id": "a", "category_id": 1, "bbox": [1, 1, 5, 5], "score": 0.9}])");
  for (int i = 0; i < 3000; ++i) {
    const std::string doc = testing::mutate(g, seeds[g.index(seeds.size())]);
    for (int which = 0; which < 4; ++which) {
      try {
        switch (which) {
          case 0: parse_coco_dataset(doc, "x"); break;
          case 1: parse_unified_coco(doc); break;
          case 2: parse_detections(doc, "m", space); break;
          default: label_space_from_json(doc);
        }
      } catch (const Error&) {
      } catch (const std::exception& e) {
        ADD_FAILURE() << "untyped exception " << e.what() << " on parser " << which;
      }
    }
  }
}

}  // namespace
}  // namespace labelfuse
