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
// labelfuse: command-line driver for the unify / fuse / review / export /
// eval pipeline, plus the synthetic benchmark.

#include <pthread.h>

#include <csignal>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "labelfuse/benchmark.hpp"
#include "labelfuse/pipeline.hpp"
#include "labelfuse/review_server.hpp"

namespace fs = std::filesystem;
using namespace labelfuse;

namespace {

std::pair<std::string, int> split_listen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) fail(ErrorCode::kConfigError, "--listen expects HOST:PORT");
  int port = 0;
  if (!detail::parse_full(std::string_view(listen).substr(colon + 1), port) || port < 0 ||
      port > 65535) {
    fail(ErrorCode::kConfigError, "bad port in --listen '" + listen + "'");
  }
  return {listen.substr(0, colon), port};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-space unification and pseudo-label fusion pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path;
  std::string output_dir;
  bool verbose = false;
  app.add_option("-c,--config", config_path, "Pipeline configuration file (INI)")
      ->check(CLI::ExistingFile);
  app.add_option("-o,--output", output_dir, "Output directory; overrides [pipeline] output");
  app.add_flag("-v,--verbose", verbose, "Print stage summaries");
  app.fallthrough();

  auto* unify = app.add_subcommand("unify", "Build the unified label space and remap tables");
  unsigned threads = 0;
  auto* fuse = app.add_subcommand("fuse", "Fuse detections into pseudo labels and a review seed");
  fuse->add_option("--threads", threads, "Worker threads; overrides [pipeline] threads")
      ->check(CLI::Range(1u, 256u));

  auto* serve = app.add_subcommand("serve", "Enqueue the review seed and serve the review API");
  std::string data_root, store_path, listen = "127.0.0.1:8080", ui_dir;
  serve->add_option("--data-root", data_root, "Image root; overrides [pipeline] data_root");
  serve->add_option("--store-path", store_path, "Review store directory (default OUTPUT/review_store)");
  serve->add_option("--listen", listen, "HOST:PORT to listen on; port 0 picks a free port")
      ->capture_default_str();
  serve->add_option("--ui-dir", ui_dir, "Static files served under /ui")->check(CLI::ExistingDirectory);

  auto* apply = app.add_subcommand("apply", "Fold review decisions into the unified dataset");
  apply->add_option("--store-path", store_path, "Review store directory (default OUTPUT/review_store)");

  auto* exp = app.add_subcommand("export", "Write the unified COCO document");

  auto* eval = app.add_subcommand("eval", "Evaluate detections against ground truth");
  std::string gt_path, dets_path;
  double score_threshold = -1;
  eval->add_option("--gt", gt_path, "Ground-truth COCO annotation file")->required();
  eval->add_option("--detections", dets_path, "COCO detection-results file")->required();
  eval->add_option("--score-threshold", score_threshold,
                   "Score threshold for P/R/F1 (default [pipeline] f1_score_threshold or 0.5)")
      ->check(CLI::Range(0.0, 1.0));

  auto* bench = app.add_subcommand("bench", "Run the seeded synthetic benchmark");
  BenchmarkParams bp;
  std::string reviewer = "oracle";
  std::string strategy = "weighted_average";
  double tau_accept = FusionConfig::kDefaultTauAccept;
  double tau_discard = FusionConfig::kDefaultTauDiscard;
  double sigma = FusionConfig::kDefaultSigmaCluster;
  bool as_json = false;
  bench->add_option("--seed", bp.world.seed, "World seed")->capture_default_str();
  bench->add_option("--datasets", bp.world.n_datasets, "Number of datasets")->capture_default_str();
  bench->add_option("--classes-per-dataset", bp.world.classes_per_dataset, "Classes per dataset")
      ->capture_default_str();
  bench->add_option("--overlap", bp.world.overlap_classes, "Classes shared by neighbouring datasets")
      ->capture_default_str();
  bench->add_option("--images", bp.world.images, "Total images")->capture_default_str();
  bench->add_option("--boxes-per-image", bp.world.boxes_per_image, "Boxes per image")
      ->capture_default_str();
  bench->add_option("--detector-seed", bp.detector_seed, "Detector seed")->capture_default_str();
  bench->add_option("--jitter-sigma", bp.noise.jitter_sigma, "Box jitter, fraction of size")
      ->capture_default_str();
  bench->add_option("--drop-rate", bp.noise.drop_rate, "Miss probability")->capture_default_str();
  bench->add_option("--fp-rate", bp.noise.fp_rate, "False positives per image")->capture_default_str();
  bench->add_option("--tau-accept", tau_accept, "Auto-accept threshold")->capture_default_str();
  bench->add_option("--tau-discard", tau_discard, "Discard threshold")->capture_default_str();
  bench->add_option("--sigma-cluster", sigma, "Clustering IoU")->capture_default_str();
  bench->add_option("--strategy", strategy, "weighted_average or highest_score")
      ->check(CLI::IsMember({"weighted_average", "highest_score"}))
      ->capture_default_str();
  bench->add_option("--reviewer", reviewer, "none or oracle")
      ->check(CLI::IsMember({"none", "oracle"}))
      ->capture_default_str();
  bench->add_option("--threads", bp.threads, "Fusion worker threads")->capture_default_str();
  bench->add_flag("--json", as_json, "Print the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (bench->parsed()) {
      bp.fusion = FusionConfig(tau_accept, tau_discard, sigma, *parse_fusion_strategy(strategy));
      bp.reviewer = reviewer == "oracle" ? ReviewerKind::kOracle : ReviewerKind::kNone;
      const auto report = run_benchmark(bp);
      std::cout << (as_json ? benchmark_report_json(report) : benchmark_report_text(report));
      return 0;
    }

    std::optional<fs::path> output_override;
    if (!output_dir.empty()) output_override = fs::path(output_dir);

    if (eval->parsed()) {
      double thr = 0.5;
      fs::path report_dir = output_override.value_or(fs::current_path());
      if (!config_path.empty()) {
        const auto cfg = load_config(config_path, output_override);
        thr = cfg.f1_score_threshold;
        report_dir = cfg.output;
      }
      if (score_threshold >= 0) thr = score_threshold;
      const auto summary = cmd_eval(gt_path, dets_path, thr, report_dir);
      std::cout << summary.text;
      return 0;
    }

    if (config_path.empty()) fail(ErrorCode::kConfigError, "--config is required");
    auto cfg = load_config(config_path, output_override);

    if (unify->parsed()) {
      const auto s = cmd_unify(cfg);
      if (verbose) std::cout << s.text;
    } else if (fuse->parsed()) {
      if (threads > 0) cfg.threads = threads;
      const auto s = cmd_fuse(cfg);
      if (verbose) std::cout << s.text;
    } else if (serve->parsed()) {
      const fs::path store = store_path.empty() ? default_store_path(cfg) : fs::path(store_path);
      EnqueueResult enq;
      auto review_store = open_review_store(cfg, store, &enq);
      std::optional<fs::path> ui;
      if (!ui_dir.empty()) ui = fs::path(ui_dir);
      ReviewServer server(*review_store, data_root.empty() ? cfg.data_root : fs::path(data_root),
                          load_route_counts(cfg), ui);
      const auto [host, port] = split_listen(listen);
      int bound = port;
      if (port == 0) {
        bound = server.bind_to_any_port(host);
        if (bound < 0) fail(ErrorCode::kStorageError, "cannot bind " + host);
      } else if (!server.bind(host, port)) {
        fail(ErrorCode::kStorageError, "cannot bind " + listen);
      }
      // Signals are taken synchronously here; worker threads inherit the mask.
      sigset_t stop_signals;
      sigemptyset(&stop_signals);
      sigaddset(&stop_signals, SIGINT);
      sigaddset(&stop_signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
      std::thread listener([&server] { server.listen_after_bind(); });
      server.wait_until_ready();
      std::cout << "enqueued " << enq.added << " (" << enq.duplicates << " already present)\n"
                << "listening on http://" << host << ":" << bound << std::endl;
      int sig = 0;
      sigwait(&stop_signals, &sig);
      server.stop();
      listener.join();
    } else if (apply->parsed()) {
      const fs::path store = store_path.empty() ? default_store_path(cfg) : fs::path(store_path);
      const auto s = cmd_apply(cfg, store);
      if (verbose) std::cout << s.text;
    } else if (exp->parsed()) {
      const auto s = cmd_export(cfg);
      if (verbose) std::cout << s.text;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "labelfuse: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "labelfuse: " << e.what() << "\n";
    return 4;
  }
}
