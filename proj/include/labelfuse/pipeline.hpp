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

// Pipeline stages driven by one INI configuration file. Each stage reads the
// previous stages' artifacts from the output directory, so stages can be
// rerun independently:
//
//   unify   labelspace.json, remap/<dataset>.json
//   fuse    fuse/pseudo_labels.json, fuse/review_seed.jsonl,
//           fuse/fusion_report.{json,txt}
//   serve   review_store/ (enqueues the review seed, then serves HTTP)
//   apply   reviewed/unified.json, reviewed/apply_report.json
//   export  unified.json
//   eval    eval_report.{txt,json}
//
// Configuration:
//
//   [pipeline]
//   output = out                  ; relative to the config file
//   aliases = aliases.txt         ; optional alias map
//   f1_score_threshold = 0.5
//   data_root = datasets          ; image root for the review service
//   threads = 1
//
//   [fusion]
//   tau_accept = 0.7
//   tau_discard = 0.05
//   sigma_cluster = 0.55
//   strategy = weighted_average   ; or highest_score
//   suppress_gt_classes = true
//
//   [dataset.<id>]
//   format = coco | yolo
//   path = ...                    ; annotation file (coco) or root directory (yolo)
//   names = ...                   ; yolo only, default <path>/names.txt
//
//   [detections.<label>]
//   model_id = ...                ; default <label>
//   path = ...                    ; detection-results array
//   space_of = <dataset id>       ; label space the model predicts in
//   target = <dataset id>         ; dataset whose images were run
//
// Relative dataset paths resolve against $LABELFUSE_DATA_ROOT when it is set,
// otherwise against the config file's directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "labelfuse/fuse.hpp"
#include "labelfuse/ingest.hpp"
#include "labelfuse/metrics.hpp"
#include "labelfuse/review.hpp"
#include "labelfuse/unify.hpp"

namespace labelfuse {

struct DatasetSource {
  std::string id;
  FormatKind format = FormatKind::kCocoAnnotations;
  std::filesystem::path path;
  std::optional<std::filesystem::path> names;
};

struct DetectionSource {
  std::string label;
  std::string model_id;
  std::filesystem::path path;
  std::string space_of;
  std::string target;
};

struct PipelineConfig {
  std::vector<DatasetSource> datasets;
  std::vector<DetectionSource> detections;
  std::optional<std::filesystem::path> aliases;
  FusionConfig fusion;
  std::filesystem::path output;
  std::filesystem::path data_root;
  double f1_score_threshold = 0.5;
  unsigned threads = 1;

  const DatasetSource* dataset(const std::string& id) const {
    for (const auto& d : datasets) {
      if (d.id == id) return &d;
    }
    return nullptr;
  }
};

// Exit status for a failure: 2 configuration, 3 unreadable or malformed
// input, 4 semantic failure.
inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kInvalidParams: return 2;
    case ErrorCode::kParseError:
    case ErrorCode::kSchemaError:
    case ErrorCode::kDanglingRef:
    case ErrorCode::kIndexOutOfRange:
    case ErrorCode::kMissingDimensions:
    case ErrorCode::kScoreOutOfRange:
    case ErrorCode::kUnknownCategory: return 3;
    default: return 4;
  }
}

namespace detail {

inline std::filesystem::path resolve_against(const std::filesystem::path& base,
                                             const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

template <typename T>
T config_value(const boost::property_tree::ptree& section, const std::string& section_name,
               const std::string& key, const T& fallback) {
  auto node = section.get_child_optional(boost::property_tree::ptree::path_type(key, '\0'));
  if (!node) return fallback;
  auto value = node->get_value_optional<T>();
  if (!value) {
    fail(ErrorCode::kConfigError, "[" + section_name + "] " + key + " = '" + node->data() +
                                      "' has the wrong type");
  }
  return *value;
}

inline std::string required_value(const boost::property_tree::ptree& section,
                                  const std::string& section_name, const std::string& key) {
  auto node = section.get_child_optional(boost::property_tree::ptree::path_type(key, '\0'));
  if (!node || node->data().empty()) {
    fail(ErrorCode::kConfigError, "[" + section_name + "] is missing '" + key + "'");
  }
  return node->data();
}

inline void allow_keys(const boost::property_tree::ptree& section, const std::string& name,
                       std::initializer_list<const char*> keys) {
  for (const auto& [key, _] : section) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) ==
        keys.end()) {
      fail(ErrorCode::kConfigError, "unknown key '" + key + "' in [" + name + "]");
    }
  }
}

inline bool config_bool(const boost::property_tree::ptree& section, const std::string& name,
                        const std::string& key, bool fallback) {
  auto text = config_value<std::string>(section, name, key, fallback ? "true" : "false");
  text = normalize_name(text);
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  fail(ErrorCode::kConfigError, "[" + name + "] " + key + " is not a boolean");
}

}  // namespace detail

inline PipelineConfig load_config(const std::filesystem::path& config_path,
                                  std::optional<std::filesystem::path> output_override = {}) {
  namespace pt = boost::property_tree;
  namespace fs = std::filesystem;
  pt::ptree root;
  try {
    pt::read_ini(config_path.string(), root);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::kConfigError, e.what());
  }
  const fs::path base = fs::absolute(config_path).parent_path();
  fs::path dataset_base = base;
  if (const char* env = std::getenv("LABELFUSE_DATA_ROOT"); env && *env) dataset_base = env;

  PipelineConfig cfg;
  cfg.output = base / "out";
  cfg.data_root = dataset_base;
  std::set<std::string> model_targets;
  bool saw_fusion = false;
  double tau_accept = FusionConfig::kDefaultTauAccept;
  double tau_discard = FusionConfig::kDefaultTauDiscard;
  double sigma = FusionConfig::kDefaultSigmaCluster;
  FusionStrategy strategy = FusionStrategy::kWeightedAverage;
  bool suppress = true;

  for (const auto& [name, section] : root) {
    if (!section.data().empty()) {
      fail(ErrorCode::kConfigError, "key '" + name + "' outside of a section");
    }
    if (name == "pipeline") {
      detail::allow_keys(section, name,
                         {"output", "aliases", "f1_score_threshold", "data_root", "threads"});
      if (auto out = detail::config_value<std::string>(section, name, "output", ""); !out.empty()) {
        cfg.output = detail::resolve_against(base, out);
      }
      if (auto a = detail::config_value<std::string>(section, name, "aliases", ""); !a.empty()) {
        cfg.aliases = detail::resolve_against(base, a);
      }
      if (auto r = detail::config_value<std::string>(section, name, "data_root", ""); !r.empty()) {
        cfg.data_root = detail::resolve_against(base, r);
      }
      cfg.f1_score_threshold = detail::config_value(section, name, "f1_score_threshold", 0.5);
      if (!(cfg.f1_score_threshold >= 0 && cfg.f1_score_threshold <= 1)) {
        fail(ErrorCode::kConfigError, "f1_score_threshold outside [0,1]");
      }
      cfg.threads = detail::config_value(section, name, "threads", 1u);
    } else if (name == "fusion") {
      saw_fusion = true;
      detail::allow_keys(section, name, {"tau_accept", "tau_discard", "sigma_cluster", "strategy",
                                         "suppress_gt_classes"});
      tau_accept = detail::config_value(section, name, "tau_accept", tau_accept);
      tau_discard = detail::config_value(section, name, "tau_discard", tau_discard);
      sigma = detail::config_value(section, name, "sigma_cluster", sigma);
      const auto s = detail::config_value<std::string>(section, name, "strategy", "weighted_average");
      auto parsed = parse_fusion_strategy(s);
      if (!parsed) fail(ErrorCode::kConfigError, "unknown fusion strategy '" + s + "'");
      strategy = *parsed;
      suppress = detail::config_bool(section, name, "suppress_gt_classes", true);
    } else if (name.rfind("dataset.", 0) == 0) {
      detail::allow_keys(section, name, {"format", "path", "names"});
      DatasetSource src;
      src.id = name.substr(8);
      if (src.id.empty()) fail(ErrorCode::kConfigError, "dataset section without id");
      if (cfg.dataset(src.id)) fail(ErrorCode::kConfigError, "duplicate dataset id '" + src.id + "'");
      const auto format = detail::required_value(section, name, "format");
      auto kind = parse_format_kind(format);
      if (!kind || *kind == FormatKind::kCocoDetections) {
        fail(ErrorCode::kConfigError, "[" + name + "] format must be coco or yolo");
      }
      src.format = *kind;
      src.path = detail::resolve_against(dataset_base, detail::required_value(section, name, "path"));
      if (auto n = detail::config_value<std::string>(section, name, "names", ""); !n.empty()) {
        src.names = detail::resolve_against(dataset_base, n);
      }
      cfg.datasets.push_back(std::move(src));
    } else if (name.rfind("detections.", 0) == 0) {
      detail::allow_keys(section, name, {"model_id", "path", "space_of", "target"});
      DetectionSource src;
      src.label = name.substr(11);
      if (src.label.empty()) fail(ErrorCode::kConfigError, "detections section without label");
      src.model_id = detail::config_value<std::string>(section, name, "model_id", src.label);
      src.path = detail::resolve_against(base, detail::required_value(section, name, "path"));
      src.space_of = detail::required_value(section, name, "space_of");
      src.target = detail::required_value(section, name, "target");
      cfg.detections.push_back(std::move(src));
    } else {
      fail(ErrorCode::kConfigError, "unknown section [" + name + "]");
    }
  }
  (void)saw_fusion;
  try {
    cfg.fusion = FusionConfig(tau_accept, tau_discard, sigma, strategy, suppress);
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, e.what());
  }
  for (const auto& d : cfg.detections) {
    if (!cfg.dataset(d.space_of)) {
      fail(ErrorCode::kConfigError, "detections '" + d.label + "': space_of '" + d.space_of +
                                        "' is not a declared dataset");
    }
    if (!cfg.dataset(d.target)) {
      fail(ErrorCode::kConfigError, "detections '" + d.label + "': target '" + d.target +
                                        "' is not a declared dataset");
    }
    if (d.target == d.space_of) {
      fail(ErrorCode::kConfigError, "detections '" + d.label +
                                        "': a model only pseudo-labels other datasets");
    }
  }
  if (output_override) cfg.output = fs::absolute(*output_override);
  return cfg;
}

// ---------------------------------------------------------------------------
// Stage helpers

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) fail(ErrorCode::kStorageError, "cannot write '" + path.string() + "'");
}

inline std::string read_artifact(const std::filesystem::path& path, const std::string& stage) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::kMissingArtifact,
         "'" + path.string() + "' is missing; run '" + stage + "' first");
  }
  return read_text_file(path);
}

}  // namespace detail

inline Dataset load_dataset(const DatasetSource& src, ParseReport* report = nullptr) {
  if (src.format == FormatKind::kYoloDirectory) {
    if (!std::filesystem::is_directory(src.path)) {
      fail(ErrorCode::kParseError, "'" + src.path.string() + "' is not a directory");
    }
    const auto names_path = src.names.value_or(src.path / "names.txt");
    return parse_yolo_dataset(src.path, read_names_file(names_path), src.id, report);
  }
  return parse_coco_dataset(read_text_file(src.path), src.id, report);
}

inline std::vector<Dataset> load_datasets(const PipelineConfig& cfg) {
  if (cfg.datasets.empty()) fail(ErrorCode::kConfigError, "no [dataset.*] sections");
  std::vector<Dataset> out;
  for (const auto& src : cfg.datasets) out.push_back(load_dataset(src));
  return out;
}

inline AliasMap load_aliases(const PipelineConfig& cfg) {
  if (!cfg.aliases) return {};
  return parse_alias_map(read_text_file(*cfg.aliases));
}

inline UnifiedSpace unify_datasets(const PipelineConfig& cfg, const std::vector<Dataset>& datasets) {
  std::vector<std::pair<std::string, LabelSpace>> spaces;
  for (const auto& d : datasets) spaces.emplace_back(d.id(), d.label_space());
  return build_unified_space(spaces, load_aliases(cfg));
}

struct StageSummary {
  std::string text;
};

inline StageSummary cmd_unify(const PipelineConfig& cfg) {
  const auto datasets = load_datasets(cfg);
  const auto unified = unify_datasets(cfg, datasets);
  detail::write_file(cfg.output / "labelspace.json", label_space_to_json(unified.space));
  std::ostringstream out;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    detail::write_file(cfg.output / "remap" / (datasets[i].id() + ".json"),
                       remap_table_to_json(unified.tables[i], datasets[i].label_space()));
    out << datasets[i].id() << ": " << datasets[i].label_space().size() << " categories, "
        << datasets[i].annotations().size() << " annotations\n";
  }
  out << "unified label space: " << unified.space.size() << " categories\n";
  for (const auto& c : unified.space.categories()) {
    out << "  " << c.id() << " " << c.canonical_name() << "\n";
  }
  return {out.str()};
}

// Everything downstream of unify needs: datasets remapped into the unified
// space, checked against the stored label space and remap tables.
struct UnifiedInputs {
  LabelSpace space;
  std::vector<Dataset> remapped;
  std::vector<RemapTable> tables;
};

inline UnifiedInputs load_unified_inputs(const PipelineConfig& cfg) {
  const LabelSpace stored =
      label_space_from_json(detail::read_artifact(cfg.output / "labelspace.json", "unify"));
  std::vector<RemapTable> tables;
  for (const auto& src : cfg.datasets) {
    tables.push_back(remap_table_from_json(
        detail::read_artifact(cfg.output / "remap" / (src.id + ".json"), "unify")));
  }
  const auto datasets = load_datasets(cfg);
  const auto fresh = unify_datasets(cfg, datasets);
  if (!(fresh.space == stored) || fresh.tables != tables) {
    fail(ErrorCode::kTableMismatch, "stored label space or remap tables are stale; rerun 'unify'");
  }
  UnifiedInputs in{stored, {}, tables};
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    in.remapped.push_back(remap_dataset(datasets[i], tables[i], stored));
  }
  return in;
}

inline std::vector<ImageRecord> all_images(const std::vector<Dataset>& datasets) {
  std::vector<ImageRecord> images;
  for (const auto& d : datasets) images.insert(images.end(), d.images().begin(), d.images().end());
  return images;
}

inline StageSummary cmd_fuse(const PipelineConfig& cfg) {
  const auto in = load_unified_inputs(cfg);
  std::map<std::string, std::vector<Detection>> foreign;  // by target dataset
  for (const auto& src : cfg.detections) {
    std::size_t space_idx = 0;
    while (cfg.datasets[space_idx].id != src.space_of) ++space_idx;
    auto dets = parse_detections(read_text_file(src.path), src.model_id,
                                 load_dataset(cfg.datasets[space_idx]).label_space());
    auto remapped = remap_detections(dets, in.tables[space_idx]);
    auto& bucket = foreign[src.target];
    bucket.insert(bucket.end(), remapped.begin(), remapped.end());
  }

  std::vector<Annotation> accepted;
  std::vector<ReviewItem> review;
  FusionReport report;
  report.per_class.assign(in.space.size(), {});
  for (std::size_t i = 0; i < in.remapped.size(); ++i) {
    const auto& target = in.remapped[i];
    auto result = fuse_dataset(target, in.tables[i].image(), foreign[target.id()], cfg.fusion,
                               FuseOptions{cfg.threads});
    accepted.insert(accepted.end(), result.accepted.begin(), result.accepted.end());
    review.insert(review.end(), result.review.begin(), result.review.end());
    merge_report(report, result.report);
  }

  const UnifiedDataset pseudo(in.space, all_images(in.remapped), accepted);
  detail::write_file(cfg.output / "fuse" / "pseudo_labels.json", export_coco(pseudo));
  std::string seed;
  for (const auto& item : review) seed += review_item_to_json(item).dump() + "\n";
  detail::write_file(cfg.output / "fuse" / "review_seed.jsonl", seed);
  detail::write_file(cfg.output / "fuse" / "fusion_report.json",
                     fusion_report_to_json(report, in.space).dump(1) + "\n");
  const std::string text = fusion_report_text(report, in.space);
  detail::write_file(cfg.output / "fuse" / "fusion_report.txt", text);
  return {text};
}

inline std::vector<ReviewItem> load_review_seed(const PipelineConfig& cfg) {
  const std::string text =
      detail::read_artifact(cfg.output / "fuse" / "review_seed.jsonl", "fuse");
  std::vector<ReviewItem> items;
  std::size_t line_no = 0;
  for (auto line : detail::lines_of(text)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      items.push_back(review_item_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kParseError, "review_seed.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

// GT of every dataset plus the auto-accepted pseudo labels.
inline UnifiedDataset load_base_unified(const PipelineConfig& cfg, const UnifiedInputs& in) {
  const UnifiedDataset pseudo = parse_unified_coco(
      detail::read_artifact(cfg.output / "fuse" / "pseudo_labels.json", "fuse"));
  std::vector<Annotation> annotations;
  for (const auto& d : in.remapped) {
    annotations.insert(annotations.end(), d.annotations().begin(), d.annotations().end());
  }
  annotations.insert(annotations.end(), pseudo.annotations().begin(), pseudo.annotations().end());
  return UnifiedDataset(in.space, all_images(in.remapped), std::move(annotations));
}

inline std::filesystem::path default_store_path(const PipelineConfig& cfg) {
  return cfg.output / "review_store";
}

// Opens (or creates) the review store for this pipeline and enqueues the
// review seed; re-enqueueing an existing seed is a no-op.
inline std::unique_ptr<ReviewStore> open_review_store(const PipelineConfig& cfg,
                                                      const std::filesystem::path& store_path,
                                                      EnqueueResult* enqueued = nullptr) {
  const auto in = load_unified_inputs(cfg);
  auto store = std::make_unique<ReviewStore>(store_path,
                                             make_review_context(in.space, all_images(in.remapped)));
  auto result = store->enqueue(load_review_seed(cfg));
  if (enqueued) *enqueued = result;
  return store;
}

inline nlohmann::json load_route_counts(const PipelineConfig& cfg) {
  const auto path = cfg.output / "fuse" / "fusion_report.json";
  if (!std::filesystem::exists(path)) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(read_text_file(path)).value("routes", nlohmann::json::object());
  } catch (const nlohmann::json::exception&) {
    return nlohmann::json::object();
  }
}

inline StageSummary cmd_apply(const PipelineConfig& cfg, const std::filesystem::path& store_path) {
  const auto in = load_unified_inputs(cfg);
  const UnifiedDataset base = load_base_unified(cfg, in);
  if (!std::filesystem::exists(store_path / "log.jsonl")) {
    fail(ErrorCode::kMissingArtifact, "no review store at '" + store_path.string() + "'; run 'serve' first");
  }
  ReviewStore store(store_path, make_review_context(in.space, base.images()));
  auto result = apply_decisions(base, store);
  detail::write_file(cfg.output / "reviewed" / "unified.json", export_coco(result.dataset));
  nlohmann::ordered_json report = {{"verified_added", result.report.verified_added},
                                   {"already_present", result.report.already_present},
                                   {"rejected", result.report.rejected},
                                   {"pending", result.report.pending}};
  detail::write_file(cfg.output / "reviewed" / "apply_report.json", report.dump(1) + "\n");
  std::ostringstream out;
  out << "verified added " << result.report.verified_added << ", rejected "
      << result.report.rejected << ", pending " << result.report.pending << "\n";
  return {out.str()};
}

struct ProvenanceCounts {
  std::size_t gt = 0, pseudo = 0, verified = 0;
};

inline ProvenanceCounts count_provenance(const UnifiedDataset& u) {
  ProvenanceCounts c;
  for (const auto& a : u.annotations()) {
    switch (a.provenance().index()) {
      case 0: ++c.gt; break;
      case 1: ++c.pseudo; break;
      default: ++c.verified; break;
    }
  }
  return c;
}

// Writes unified.json from the reviewed dataset when 'apply' has run, from
// GT plus accepted pseudo labels otherwise, and checks that it parses back
// to the same dataset.
inline StageSummary cmd_export(const PipelineConfig& cfg) {
  const auto in = load_unified_inputs(cfg);
  const auto reviewed = cfg.output / "reviewed" / "unified.json";
  const UnifiedDataset u = std::filesystem::exists(reviewed)
                               ? parse_unified_coco(read_text_file(reviewed))
                               : load_base_unified(cfg, in);
  if (!(u.label_space() == in.space)) {
    fail(ErrorCode::kTableMismatch, "reviewed dataset uses a stale label space; rerun 'apply'");
  }
  const std::string doc = export_coco(u);
  bool round_trips = false;
  try {
    round_trips = parse_unified_coco(doc) == u;
  } catch (const Error&) {
  }
  if (!round_trips) fail(ErrorCode::kSelfCheckFailed, "exported document does not parse back");
  detail::write_file(cfg.output / "unified.json", doc);
  const auto c = count_provenance(u);
  std::ostringstream out;
  out << "images " << u.images().size() << ", annotations " << u.annotations().size()
      << " (gt " << c.gt << ", pseudo " << c.pseudo << ", verified " << c.verified << ")\n";
  return {out.str()};
}

struct EvalSummary {
  MetricsReport report;
  std::string text;
};

// Ground truth is any annotation document; detections use its label space.
inline EvalSummary cmd_eval(const std::filesystem::path& gt_path,
                            const std::filesystem::path& dets_path, double score_threshold,
                            const std::filesystem::path& report_dir) {
  const Dataset gt = parse_coco_dataset(read_text_file(gt_path), "gt");
  const auto dets = parse_detections(read_text_file(dets_path), "eval", gt.label_space());
  EvalSummary summary{evaluate(gt, dets, score_threshold), {}};
  summary.text = metrics_report_text(summary.report);
  detail::write_file(report_dir / "eval_report.txt", summary.text);
  detail::write_file(report_dir / "eval_report.json", metrics_report_json(summary.report));
  return summary;
}

}  // namespace labelfuse
