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

// Shared helpers for the test suite: temp directories and random instance
// generators. Generators draw from std::mt19937_64 so a failing seed can be
// replayed by hand.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "labelfuse/core.hpp"
#include "labelfuse/unify.hpp"

namespace labelfuse::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("labelfuse-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

  // A valid box inside a width x height image.
  BoundingBox box_in(int width, int height) {
    const double w = real(1.0, width * 0.6);
    const double h = real(1.0, height * 0.6);
    return BoundingBox(real(0, width - w), real(0, height - h), w, h);
  }

  std::string name(std::size_t len = 5) {
    static constexpr char kAlpha[] = "abcdefghij";
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += kAlpha[index(10)];
    return s;
  }
};

// A random valid UnifiedDataset: a few source datasets, a label space whose
// ids follow canonical-name order, and annotations of every provenance.
inline UnifiedDataset random_unified(Gen& g) {
  std::set<std::string> names;
  const std::size_t k = g.index(5) + 1;
  while (names.size() < k) names.insert(g.name(g.index(4) + 1));
  std::vector<CategorySpec> cats;
  for (const auto& n : names) {
    std::set<std::string> aliases;
    if (g.coin(0.3)) aliases.insert(n + "_" + g.name(2));
    cats.emplace_back(static_cast<CategoryId>(cats.size()), n, aliases);
  }
  LabelSpace space(cats);
  std::vector<ImageRecord> images;
  const std::size_t n_ds = g.index(3) + 1;
  for (std::size_t d = 0; d < n_ds; ++d) {
    const std::size_t n_img = g.index(4);
    for (std::size_t i = 0; i < n_img; ++i) {
      const std::string id = g.coin(0.5) ? std::to_string(i + 1) : "im" + g.name(3) + std::to_string(i);
      images.emplace_back(id, "ds" + std::to_string(d), "images/" + id + ".png", g.integer(8, 1024),
                          g.integer(8, 1024));
    }
  }
  std::vector<Annotation> anns;
  for (const auto& img : images) {
    const std::size_t n = g.index(5);
    for (std::size_t i = 0; i < n; ++i) {
      Provenance p = GroundTruth{};
      const Pseudo payload{"m" + g.name(2) + (g.coin(0.3) ? "+m2" : ""), g.real(0, 1)};
      switch (g.index(3)) {
        case 0: break;
        case 1: p = payload; break;
        default:
          p = Verified{"rev" + g.name(2), payload, static_cast<ReviewAction>(g.index(3))};
      }
      anns.emplace_back(key_of(img), static_cast<CategoryId>(g.index(k)),
                        g.box_in(img.width(), img.height()), p);
    }
  }
  return UnifiedDataset(space, images, anns);
}

// Byte-level mutation: flips, inserts, deletions, truncation and splices of
// JSON-significant characters.
inline std::string mutate(Gen& g, std::string doc) {
  static constexpr char kTokens[] = "{}[]\",:0-1.e\\ntfa\x00\xff";
  const std::size_t edits = g.index(8) + 1;
  for (std::size_t e = 0; e < edits && !doc.empty(); ++e) {
    const std::size_t at = g.index(doc.size());
    switch (g.index(5)) {
      case 0: doc[at] = static_cast<char>(g.integer(0, 255)); break;
      case 1: doc.insert(doc.begin() + static_cast<std::ptrdiff_t>(at), kTokens[g.index(sizeof(kTokens) - 1)]); break;
      case 2: doc.erase(at, g.index(8) + 1); break;
      case 3: doc.resize(at); break;
      default: {
        const std::size_t from = g.index(doc.size());
        doc.insert(at, doc.substr(from, g.index(16) + 1));
      }
    }
  }
  return doc;
}

using Spaces = std::vector<std::pair<std::string, LabelSpace>>;

// Random label spaces plus a disjoint alias map over a shared name pool.
struct UnifyInstance {
  std::vector<std::vector<std::string>> raw;  // names as written in each source
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  Spaces spaces;
  AliasMap aliases;
};

inline std::string random_case(Gen& g, const std::string& s) {
  std::string out = s;
  for (auto& c : out) {
    if (g.coin(0.3)) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return g.coin(0.1) ? " " + out : out;
}

inline UnifyInstance random_unify_instance(Gen& g) {
  static const std::vector<std::string> pool = {"car", "person", "pedestrian", "rider", "truck",
                                                "bus", "van", "sign", "light", "pole", "dog",
                                                "cat", "human", "lorry"};
  UnifyInstance in;
  // disjoint alias groups over a shuffled pool
  std::vector<std::string> names = pool;
  std::shuffle(names.begin(), names.end(), g.rng);
  std::size_t at = 0;
  const std::size_t n_groups = g.index(4);
  for (std::size_t k = 0; k < n_groups && at + 2 <= names.size(); ++k) {
    std::pair<std::string, std::vector<std::string>> grp{names[at++], {}};
    const std::size_t members = g.index(3) + 1;
    for (std::size_t m = 0; m < members && at < names.size(); ++m) grp.second.push_back(names[at++]);
    if (g.coin(0.2)) grp.second.push_back(grp.first);
    in.groups.push_back(grp);
  }
  std::vector<AliasGroup> alias_groups;
  for (const auto& [c, ms] : in.groups) alias_groups.push_back({c, {ms.begin(), ms.end()}});
  in.aliases = AliasMap(alias_groups);

  const std::size_t n_spaces = g.index(4) + 1;
  for (std::size_t s = 0; s < n_spaces; ++s) {
    std::vector<std::string> picked = pool;
    std::shuffle(picked.begin(), picked.end(), g.rng);
    picked.resize(g.index(6) + 1);
    std::vector<std::string> written;
    for (const auto& p : picked) written.push_back(random_case(g, p));
    in.raw.push_back(written);
    in.spaces.emplace_back("ds" + std::to_string(s), LabelSpace::from_names(written));
  }
  return in;
}

}  // namespace labelfuse::testing
