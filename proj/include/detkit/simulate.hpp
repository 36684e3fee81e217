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
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "detkit/detio.hpp"
#include "detkit/nms.hpp"

namespace detkit {

struct ValueRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct CountRange {
  int lo = 0;
  int hi = 0;
};

// Synthetic ground-truth generator settings. Defaults give a mid-density
// traffic scene with the stock 21-class frequency profile.
struct SceneConfig {
  int image_count = 200;
  CountRange boxes_per_image{1, 8};
  std::vector<double> class_weights;  // empty selects default_class_weights()
  ValueRange box_size{0.05, 0.30};    // normalized widths and heights
  double overlap_allowance = 0.30;    // max IoU between generated boxes
  std::uint64_t seed = 42;
  int image_width = 1024;
  int image_height = 1024;
  int group_size = 1;  // consecutive images sharing one frame group
};

// How confidence degrades with localization error:
//   confidence = clamp(base - penalty * mean_abs_offset + N(0, noise_sigma),
//                      0, 1)
// where mean_abs_offset averages the four absolute coordinate displacements.
struct ConfidenceModel {
  double base = 0.8;
  double penalty = 5.0;
  double noise_sigma = 0.05;
};

// Noise profile of one synthetic detector.
struct DetectorProfile {
  std::string name;                  // row label in reports
  double miss_rate = 0.2;            // probability a GT box goes undetected
  double jitter_sigma = 0.02;        // stddev of additive coordinate noise
  double false_positive_rate = 1.0;  // expected spurious boxes per image
  double class_confusion_rate = 0.02;
  ConfidenceModel confidence;
  ValueRange fp_confidence{0.05, 0.50};
  ValueRange fp_box_size{0.05, 0.30};
  std::uint64_t seed_offset = 0;
};

// The stock 21 traffic classes and their relative label frequencies.
const std::vector<std::string>& default_class_names();
const std::vector<double>& default_class_weights();

void validate(const SceneConfig& cfg);
void validate(const DetectorProfile& profile);

// Deterministic per (cfg.seed, image_index): identical arguments give an
// identical scene regardless of call order or threading. Throws when the
// overlap constraint cannot be met within bounded retries.
std::vector<GroundTruthBox> generate_scene(const SceneConfig& cfg,
                                           int image_index);

// One noisy pass over a scene. Deterministic per (profile.seed_offset,
// model_id, image_index). Each GT box is independently missed with
// miss_rate, otherwise emitted with jittered, clipped coordinates and a
// confidence from the confidence model; false positives are appended with a
// Poisson-drawn count.
std::vector<Detection> simulate_detector(const std::vector<GroundTruthBox>& gts,
                                         const DetectorProfile& profile,
                                         int model_id, int image_index,
                                         int class_count);

struct ExperimentConfig {
  SceneConfig scene;
  std::vector<DetectorProfile> detectors;  // empty selects four stock profiles
  FusionConfig fusion;
  double eval_iou = 0.5;
  int runs = 50;

  std::vector<DetectorProfile> resolved_detectors() const;
  int class_count() const;
};

struct ExperimentRow {
  std::string name;
  double mean_map = 0.0;
};

// Aggregate of all runs: mean mAP per detector and for the fused output,
// plus the per-run tally of strict ensemble wins.
struct ExperimentReport {
  std::vector<ExperimentRow> rows;     // detectors first, ensemble last
  std::vector<std::uint8_t> run_wins;  // 1 where fused beat every detector
  int wins = 0;
  int runs = 0;
  double eval_iou = 0.5;
};

// Scores every detector alone and the NMS fusion of all of them over `runs`
// seeded datasets. Run r derives its streams from (scene.seed + r,
// seed_offset + r), so the report is byte-identical for identical configs.
ExperimentReport run_ensemble_experiment(const ExperimentConfig& cfg,
                                         unsigned threads = 1);

void write_experiment_table(std::ostream& out, const ExperimentReport& report);

// JSON config; every key optional, errors name the offending key path.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Writes manifest.json, labels/ and preds/<detector>/ in the toolkit's file
// formats so the other commands can consume the synthetic dataset.
void materialize_dataset(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir);

}  // namespace detkit
