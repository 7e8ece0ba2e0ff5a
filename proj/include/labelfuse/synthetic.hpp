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

// Seeded synthetic multi-dataset worlds and simulated detectors.
//
// Random streams: every (purpose, index) pair gets its own generator seeded
// with stream_seed(seed, purpose, index), so images can be generated in any
// order or in parallel with identical results. Samplers are written out
// here rather than taken from <random> distributions, whose output is
// implementation-defined; std::mt19937_64 itself is fully specified.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "labelfuse/core.hpp"
#include "labelfuse/geometry.hpp"

namespace labelfuse {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(purpose * 0x100000001B3ull + splitmix64(index)));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * n) % n; }

  // Box-Muller; the second variate is discarded to keep streams simple.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Knuth's multiplication method; fine for the small means used here.
  std::size_t poisson(double mean) {
    if (mean <= 0) return 0;
    const double limit = std::exp(-mean);
    std::size_t k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

struct WorldParams {
  std::uint64_t seed = 2023;
  std::size_t n_datasets = 3;
  std::size_t classes_per_dataset = 4;
  std::size_t overlap_classes = 2;
  std::size_t images = 200;  // total, assigned round-robin to datasets
  std::size_t boxes_per_image = 6;
  int image_width = 640;
  int image_height = 480;
};

struct World {
  UnifiedDataset truth;          // every box of every class, ground truth
  std::vector<Dataset> visible;  // each with GT only for its own classes
};

inline std::string synthetic_class_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "class_%03zu", i);
  return buf;
}

inline std::string synthetic_dataset_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ds%zu", i);
  return buf;
}

// Datasets sit on a ring of classes: dataset i covers classes
// i*(c-o) .. i*(c-o)+c-1 (mod total), so cyclically adjacent datasets share
// o classes. With one dataset the world has exactly c classes.
inline std::size_t synthetic_class_count(const WorldParams& p) {
  if (p.n_datasets == 1) return p.classes_per_dataset;
  return p.n_datasets * (p.classes_per_dataset - p.overlap_classes);
}

inline std::vector<std::size_t> synthetic_dataset_classes(const WorldParams& p, std::size_t i) {
  const std::size_t total = synthetic_class_count(p);
  const std::size_t stride = p.classes_per_dataset - p.overlap_classes;
  std::set<std::size_t> cls;
  for (std::size_t k = 0; k < p.classes_per_dataset; ++k) cls.insert((i * stride + k) % total);
  return {cls.begin(), cls.end()};
}

inline void validate_world_params(const WorldParams& p) {
  auto bad = [](const std::string& why) { fail(ErrorCode::kInvalidParams, why); };
  if (p.n_datasets == 0) bad("n_datasets must be positive");
  if (p.classes_per_dataset == 0) bad("classes_per_dataset must be positive");
  if (p.overlap_classes > p.classes_per_dataset) bad("overlap_classes exceeds classes_per_dataset");
  if (p.n_datasets > 1) {
    if (p.overlap_classes == p.classes_per_dataset) bad("datasets would share every class");
    if (synthetic_class_count(p) < p.classes_per_dataset) {
      bad("too few datasets for the requested overlap");
    }
  }
  if (p.images == 0) bad("images must be positive");
  if (p.image_width < 16 || p.image_height < 16) bad("images must be at least 16x16");
  if (synthetic_class_count(p) > 999) bad("too many classes");
}

inline World generate_world(const WorldParams& p) {
  validate_world_params(p);
  const std::size_t total = synthetic_class_count(p);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < total; ++c) names.push_back(synthetic_class_name(c));
  const LabelSpace unified = LabelSpace::from_names(names);

  std::vector<std::vector<std::size_t>> classes_of(p.n_datasets);
  std::vector<std::vector<ImageRecord>> images_of(p.n_datasets);
  std::vector<std::vector<Annotation>> anns_of(p.n_datasets);
  std::vector<ImageRecord> all_images;
  std::vector<Annotation> all_anns;
  for (std::size_t i = 0; i < p.n_datasets; ++i) classes_of[i] = synthetic_dataset_classes(p, i);

  for (std::size_t k = 0; k < p.images; ++k) {
    const std::size_t ds = k % p.n_datasets;
    char id[32];
    std::snprintf(id, sizeof(id), "img_%05zu", k);
    ImageRecord img(id, synthetic_dataset_name(ds), std::string("images/") + id + ".jpg",
                    p.image_width, p.image_height);
    Rng rng(stream_seed(p.seed, 1, k));
    std::vector<std::vector<BoundingBox>> placed(total);
    for (std::size_t b = 0; b < p.boxes_per_image; ++b) {
      const std::size_t cls = rng.index(total);
      for (int attempt = 0; attempt < 50; ++attempt) {
        const double w = std::round(rng.uniform(0.05, 0.25) * p.image_width);
        const double h = std::round(rng.uniform(0.05, 0.25) * p.image_height);
        const double x = std::floor(rng.uniform(0, p.image_width - w));
        const double y = std::floor(rng.uniform(0, p.image_height - h));
        BoundingBox box(x, y, w, h);
        const bool overlaps = std::any_of(placed[cls].begin(), placed[cls].end(),
                                          [&](const BoundingBox& o) { return intersection_area(o, box) > 0; });
        if (overlaps) continue;
        placed[cls].push_back(box);
        Annotation a(key_of(img), static_cast<CategoryId>(cls), box);
        all_anns.push_back(a);
        const auto& own = classes_of[ds];
        auto pos = std::find(own.begin(), own.end(), cls);
        if (pos != own.end()) {
          anns_of[ds].emplace_back(key_of(img), static_cast<CategoryId>(pos - own.begin()), box);
        }
        break;
      }
    }
    images_of[ds].push_back(img);
    all_images.push_back(std::move(img));
  }

  World world{UnifiedDataset(unified, std::move(all_images), std::move(all_anns)), {}};
  for (std::size_t i = 0; i < p.n_datasets; ++i) {
    std::vector<std::string> own_names;
    for (std::size_t c : classes_of[i]) own_names.push_back(names[c]);
    world.visible.emplace_back(synthetic_dataset_name(i), LabelSpace::from_names(own_names),
                               std::move(images_of[i]), std::move(anns_of[i]));
  }
  return world;
}

struct DetectorNoiseModel {
  double jitter_sigma = 0.08;  // std-dev of coordinate noise, fraction of box size
  double drop_rate = 0.2;      // probability a true box is missed
  double fp_rate = 0.5;        // mean false positives per image (Poisson)
  double tp_score_lo = 0.6;    // true-positive scores ~ U(tp_score_lo, tp_score_hi)
  double tp_score_hi = 1.0;
  double fp_score_lo = 0.05;   // false-positive scores ~ U(fp_score_lo, fp_score_hi)
  double fp_score_hi = 0.5;

  static DetectorNoiseModel none() { return {0, 0, 0, 1.0, 1.0, 0.05, 0.5}; }

  void validate() const {
    auto in01 = [](double v) { return v >= 0 && v <= 1; };
    if (!(jitter_sigma >= 0) || !std::isfinite(jitter_sigma)) {
      fail(ErrorCode::kInvalidParams, "jitter_sigma must be non-negative");
    }
    if (!(drop_rate >= 0 && drop_rate <= 1)) fail(ErrorCode::kInvalidParams, "drop_rate outside [0,1]");
    if (!(fp_rate >= 0 && fp_rate <= 50)) fail(ErrorCode::kInvalidParams, "fp_rate outside [0,50]");
    if (!(in01(tp_score_lo) && in01(tp_score_hi) && tp_score_lo <= tp_score_hi &&
          in01(fp_score_lo) && in01(fp_score_hi) && fp_score_lo <= fp_score_hi)) {
      fail(ErrorCode::kInvalidParams, "score ranges must be ordered sub-intervals of [0,1]");
    }
  }
};

// Detections of a model whose label space is `model_space`, run over every
// image of `truth`. Category ids are in model_space; classes are matched by
// name. Each image draws from stream (seed, 2, fnv1a64(image id)), so the
// output for an image does not depend on which other images are present.
inline std::vector<Detection> simulate_detector(const UnifiedDataset& truth,
                                                const DetectorNoiseModel& noise,
                                                const LabelSpace& model_space,
                                                const std::string& model_id, std::uint64_t seed) {
  noise.validate();
  if (model_space.empty()) fail(ErrorCode::kInvalidParams, "model label space is empty");
  std::map<ImageKey, std::vector<const Annotation*>> by_image;
  for (const auto& a : truth.annotations()) by_image[a.image()].push_back(&a);

  std::vector<Detection> out;
  for (const ImageRecord& img : truth.images()) {
    Rng rng(stream_seed(seed, 2, fnv1a64(img.id())));
    for (const Annotation* a : by_image[key_of(img)]) {
      auto own = model_space.find(truth.label_space().name(a->category_id()));
      if (!own) continue;
      if (rng.bernoulli(noise.drop_rate)) continue;
      const auto& b = a->bbox();
      BoxCoords j{b.x() + rng.normal() * noise.jitter_sigma * b.w(),
                  b.y() + rng.normal() * noise.jitter_sigma * b.h(),
                  b.w() + rng.normal() * noise.jitter_sigma * b.w(),
                  b.h() + rng.normal() * noise.jitter_sigma * b.h()};
      j.w = std::max(j.w, 1.0);
      j.h = std::max(j.h, 1.0);
      const double score = rng.uniform(noise.tp_score_lo, noise.tp_score_hi);
      try {
        out.emplace_back(img.id(), *own, clamp_box(j, img), score, model_id);
      } catch (const Error&) {
        // jittered entirely off-image: counts as a miss
      }
    }
    const std::size_t fps = rng.poisson(noise.fp_rate);
    for (std::size_t f = 0; f < fps; ++f) {
      const auto cls = static_cast<CategoryId>(rng.index(model_space.size()));
      const double w = std::round(rng.uniform(0.05, 0.25) * img.width());
      const double h = std::round(rng.uniform(0.05, 0.25) * img.height());
      const double x = std::floor(rng.uniform(0, img.width() - w));
      const double y = std::floor(rng.uniform(0, img.height() - h));
      const double score = rng.uniform(noise.fp_score_lo, noise.fp_score_hi);
      out.emplace_back(img.id(), cls, BoundingBox(x, y, w, h), score, model_id);
    }
  }
  return out;
}

}  // namespace labelfuse
