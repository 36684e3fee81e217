/* Copyright 2026 The Detkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detkit/dataset.hpp"
#include "detkit/detio.hpp"
#include "detkit/errors.hpp"
#include "detkit/eval.hpp"
#include "detkit/nms.hpp"
#include "detkit/parallel.hpp"
#include "detkit/simulate.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

// Machine-readable output goes to stdout; configuration echo and
// diagnostics go to stderr.
std::ostream& config_echo() { return std::cerr; }

std::map<std::string, fs::path> prediction_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw detkit::InputError("prediction directory not found: " +
                             dir.string());
  }
  std::map<std::string, fs::path> by_stem;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() != ".txt") continue;
    by_stem.emplace(entry.path().stem().string(), entry.path());
  }
  return by_stem;
}

std::string sanitize_filename(const std::string& name) {
  std::string safe;
  for (const char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    safe += ok ? c : '_';
  }
  return safe;
}

struct StatsArgs {
  std::string manifest;
  std::string csv;
};

int run_stats(const StatsArgs& args) {
  config_echo() << "[detkit stats] manifest=" << args.manifest
                << (args.csv.empty() ? "" : " csv=" + args.csv) << "\n";
  const auto manifest = detkit::load_manifest(args.manifest);
  const auto stats = detkit::class_stats(manifest);
  detkit::write_stats_table(std::cout, stats, manifest.classes);
  if (!args.csv.empty()) {
    std::ofstream out(args.csv, std::ios::trunc);
    if (!out) {
      throw detkit::InputError("cannot open " + args.csv + " for writing");
    }
    detkit::write_stats_csv(out, stats, manifest.classes);
  }
  return kExitOk;
}

struct SplitArgs {
  std::string manifest;
  std::size_t folds = 4;
  std::uint64_t seed = 42;
  std::string out_dir;
};

int run_split(const SplitArgs& args) {
  config_echo() << "[detkit split] manifest=" << args.manifest
                << " folds=" << args.folds << " seed=" << args.seed
                << " out=" << args.out_dir << "\n";
  const auto manifest = detkit::load_manifest(args.manifest);
  const auto folds = detkit::split_folds(manifest, args.folds, args.seed);
  detkit::write_folds(folds, args.out_dir);
  for (const auto& fold : folds) {
    std::cout << "fold " << fold.fold_index << ": train "
              << fold.train_ids.size() << " val " << fold.val_ids.size()
              << "\n";
  }
  return kExitOk;
}

struct FuseArgs {
  std::vector<std::string> inputs;
  double iou = 0.45;
  double conf = 0.3;
  bool class_agnostic = false;
  std::string out_dir;
};

int run_fuse(const FuseArgs& args) {
  config_echo() << "[detkit fuse] inputs=";
  for (std::size_t i = 0; i < args.inputs.size(); ++i) {
    config_echo() << (i ? "," : "") << args.inputs[i];
  }
  config_echo() << " iou=" << args.iou << " conf=" << args.conf
                << " class_aware=" << (args.class_agnostic ? "false" : "true")
                << " out=" << args.out_dir << "\n";

  detkit::FusionConfig cfg{args.iou, args.conf, !args.class_agnostic};
  cfg.validate();

  std::vector<std::map<std::string, fs::path>> per_dir;
  per_dir.reserve(args.inputs.size());
  for (const auto& dir : args.inputs) {
    per_dir.push_back(prediction_files(dir));
  }
  std::set<std::string> stems;
  for (const auto& files : per_dir) {
    for (const auto& [stem, path] : files) stems.insert(stem);
  }
  std::vector<std::string> missing;
  for (const auto& stem : stems) {
    for (std::size_t d = 0; d < per_dir.size(); ++d) {
      if (!per_dir[d].count(stem)) {
        missing.push_back(args.inputs[d] + "/" + stem + ".txt");
      }
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& file : missing) list += "\n  " + file;
    throw detkit::InputError("prediction file sets do not match across input "
                             "directories; missing:" +
                             list);
  }

  fs::create_directories(args.out_dir);
  for (const auto& stem : stems) {
    std::vector<std::vector<detkit::Detection>> per_model;
    per_model.reserve(per_dir.size());
    for (std::size_t d = 0; d < per_dir.size(); ++d) {
      per_model.push_back(detkit::read_prediction_file(per_dir[d].at(stem),
                                                       static_cast<int>(d)));
    }
    const auto fused = detkit::ensemble_fuse(per_model, cfg);
    detkit::write_prediction_file(fs::path(args.out_dir) / (stem + ".txt"),
                                  fused);
  }
  std::cout << "fused " << stems.size() << " image(s) from "
            << args.inputs.size() << " model(s) into " << args.out_dir
            << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string pred_dir;
  std::string manifest;
  double iou = 0.5;
  std::string iou_range;
  std::string format = "text";
  std::string curves_dir;
  bool interpolated = false;
};

detkit::IouSpec parse_iou_range(const std::string& text) {
  const auto first = text.find(':');
  const auto second = text.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw detkit::InputError("--iou-range expects lo:hi:step, got '" + text +
                             "'");
  }
  const auto parse = [&](const std::string& token) {
    double value = 0.0;
    const char* begin = token.c_str();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || token.empty()) {
      throw detkit::InputError("--iou-range expects lo:hi:step, got '" + text +
                               "'");
    }
    return value;
  };
  return detkit::IouSpec::range(parse(text.substr(0, first)),
                                parse(text.substr(first + 1, second - first - 1)),
                                parse(text.substr(second + 1)));
}

int run_eval(const EvalArgs& args) {
  config_echo() << "[detkit eval] pred=" << args.pred_dir
                << " gt=" << args.manifest << " iou="
                << (args.iou_range.empty() ? std::to_string(args.iou)
                                           : args.iou_range)
                << " format=" << args.format
                << (args.curves_dir.empty() ? "" : " curves=" + args.curves_dir)
                << (args.interpolated ? " interpolated" : "") << "\n";
  if (args.format != "text" && args.format != "json") {
    throw detkit::InputError("--format must be text or json, got '" +
                             args.format + "'");
  }
  const auto manifest = detkit::load_manifest(args.manifest);
  const int class_count = static_cast<int>(manifest.classes.size());

  std::map<std::string, std::vector<detkit::Detection>> predictions;
  for (const auto& [stem, path] : prediction_files(args.pred_dir)) {
    predictions.emplace(stem,
                        detkit::read_prediction_file(path, 0, class_count));
  }

  const detkit::IouSpec spec = args.iou_range.empty()
                                   ? detkit::IouSpec::single(args.iou)
                                   : parse_iou_range(args.iou_range);
  detkit::ApOptions options;
  options.interpolated = args.interpolated;
  const auto report =
      detkit::evaluate_dataset(manifest, predictions, spec, options);

  if (args.format == "json") {
    detkit::write_report_json(std::cout, report);
  } else {
    detkit::write_report_text(std::cout, report);
  }

  if (!args.curves_dir.empty()) {
    fs::create_directories(args.curves_dir);
    for (const auto& entry : report.per_class) {
      if (entry.gt_count == 0 && entry.pred_count == 0) continue;
      const std::string& name =
          report.class_names[static_cast<std::size_t>(entry.class_id)];
      const fs::path path =
          fs::path(args.curves_dir) / (sanitize_filename(name) + ".csv");
      std::ofstream out(path, std::ios::trunc);
      if (!out) {
        throw detkit::InputError("cannot open " + path.string() +
                                 " for writing");
      }
      detkit::write_pr_curve_csv(out, entry.curve);
    }
  }
  return kExitOk;
}

struct AuditArgs {
  std::string manifest;
  double iou = 0.9;
};

int run_audit(const AuditArgs& args) {
  config_echo() << "[detkit audit] gt=" << args.manifest << " iou=" << args.iou
                << "\n";
  const auto manifest = detkit::load_manifest(args.manifest);
  const auto anomalies = detkit::audit_labels(manifest, args.iou);
  for (const auto& anomaly : anomalies) {
    std::cout << detkit::describe(anomaly, manifest.classes) << "\n";
  }
  std::cout << anomalies.size() << " anomalies\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string config;
  std::string out_dir;
};

detkit::ExperimentConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return detkit::ExperimentConfig{};
  return detkit::load_experiment_config(path);
}

int run_simulate(const SimulateArgs& args) {
  config_echo() << "[detkit simulate] config="
                << (args.config.empty() ? "<defaults>" : args.config)
                << " out=" << args.out_dir << "\n";
  const auto cfg = load_config_or_default(args.config);
  detkit::materialize_dataset(cfg, args.out_dir);
  std::cout << "wrote " << cfg.scene.image_count << " image(s) and "
            << cfg.resolved_detectors().size()
            << " detector prediction set(s) to " << args.out_dir << "\n";
  return kExitOk;
}

struct ExperimentArgs {
  std::string config;
};

int run_experiment(const ExperimentArgs& args) {
  const unsigned threads = detkit::default_thread_count();
  config_echo() << "[detkit experiment] config="
                << (args.config.empty() ? "<defaults>" : args.config)
                << " threads=" << threads << "\n";
  const auto cfg = load_config_or_default(args.config);
  const auto report = detkit::run_ensemble_experiment(cfg, threads);
  detkit::write_experiment_table(std::cout, report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"detkit: detector prediction fusion, evaluation and dataset "
               "tooling"};
  app.require_subcommand(1);

  StatsArgs stats_args;
  auto* stats = app.add_subcommand(
      "stats", "Per-class label counts for a dataset manifest");
  stats->add_option("manifest", stats_args.manifest, "dataset manifest JSON")
      ->required();
  stats->add_option("--csv", stats_args.csv, "also write the table as CSV");

  SplitArgs split_args;
  auto* split = app.add_subcommand(
      "split", "Grouped k-fold split of a dataset manifest");
  split->add_option("manifest", split_args.manifest, "dataset manifest JSON")
      ->required();
  split->add_option("--folds", split_args.folds, "number of folds")
      ->required();
  split->add_option("--seed", split_args.seed, "shuffle seed (default 42)");
  split->add_option("--out", split_args.out_dir, "output directory")
      ->required();

  FuseArgs fuse_args;
  auto* fuse = app.add_subcommand(
      "fuse", "NMS-ensemble per-image prediction files from several models");
  fuse->add_option("--inputs", fuse_args.inputs,
                   "one prediction directory per model")
      ->required()
      ->expected(1, -1);
  fuse->add_option("--iou", fuse_args.iou,
                   "suppression IoU threshold (default 0.45)");
  fuse->add_option("--conf", fuse_args.conf,
                   "confidence threshold (default 0.3)");
  fuse->add_flag("--class-agnostic", fuse_args.class_agnostic,
                 "suppress across classes");
  fuse->add_option("--out", fuse_args.out_dir, "output directory")
      ->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand(
      "eval", "Score a prediction directory against manifest ground truth");
  eval->add_option("--pred", eval_args.pred_dir, "prediction directory")
      ->required();
  eval->add_option("--gt", eval_args.manifest, "dataset manifest JSON")
      ->required();
  auto* iou_opt = eval->add_option("--iou", eval_args.iou,
                                   "matching IoU threshold (default 0.5)");
  eval->add_option("--iou-range", eval_args.iou_range,
                   "threshold sweep lo:hi:step")
      ->excludes(iou_opt);
  eval->add_option("--format", eval_args.format, "text or json");
  eval->add_option("--curves", eval_args.curves_dir,
                   "write per-class PR curves as CSV into this directory");
  eval->add_flag("--interpolated", eval_args.interpolated,
                 "use the interpolated AP mode (cross-check only)");

  AuditArgs audit_args;
  auto* audit = app.add_subcommand(
      "audit", "Flag duplicate/conflicting/degenerate ground-truth labels");
  audit->add_option("--gt", audit_args.manifest, "dataset manifest JSON")
      ->required();
  audit->add_option("--iou", audit_args.iou,
                    "near-duplicate IoU threshold (default 0.9)");

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand(
      "simulate", "Materialize a synthetic dataset with noisy detectors");
  simulate->add_option("--config", simulate_args.config,
                       "experiment config JSON (defaults when omitted)");
  simulate->add_option("--out", simulate_args.out_dir, "output directory")
      ->required();

  ExperimentArgs experiment_args;
  auto* experiment = app.add_subcommand(
      "experiment",
      "Score single detectors vs their NMS ensemble over seeded runs");
  experiment->add_option("--config", experiment_args.config,
                         "experiment config JSON (defaults when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (stats->parsed()) return run_stats(stats_args);
    if (split->parsed()) return run_split(split_args);
    if (fuse->parsed()) return run_fuse(fuse_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (audit->parsed()) return run_audit(audit_args);
    if (simulate->parsed()) return run_simulate(simulate_args);
    if (experiment->parsed()) return run_experiment(experiment_args);
    std::cerr << "error: no subcommand selected\n";
    return kExitInput;
  } catch (const detkit::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
