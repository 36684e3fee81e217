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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "detkit/detio.hpp"

namespace detkit {

// One train/validation partition. Image id lists keep manifest order; the
// two sides are disjoint and no frame group spans both.
struct FoldSpec {
  std::size_t fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

// Label counts per class across the dataset.
struct ClassStats {
  std::vector<std::size_t> counts;
  std::size_t total = 0;
};

ClassStats class_stats(const DatasetManifest& manifest);

// Grouped k-fold split: frame groups (not images) are shuffled by the seeded
// generator and dealt round-robin into k validation buckets; fold i validates
// bucket i and trains on the rest. Identical seeds give identical folds on
// every platform. Throws when k < 2 or k exceeds the distinct group count.
std::vector<FoldSpec> split_folds(const DatasetManifest& manifest,
                                  std::size_t k, std::uint64_t seed);

// One file per fold per side: fold_<i>_train.txt / fold_<i>_val.txt with one
// image id per line.
void write_folds(const std::vector<FoldSpec>& folds,
                 const std::filesystem::path& out_dir);

enum class AnomalyKind {
  kDuplicateLabel,    // same class, near-identical boxes
  kConflictingLabel,  // different classes, near-identical boxes
  kDegenerateBox,     // zero area
};

struct Anomaly {
  std::string image_id;
  AnomalyKind kind = AnomalyKind::kDegenerateBox;
  std::size_t box_a = 0;
  std::optional<std::size_t> box_b;
  int class_a = 0;
  int class_b = 0;
  double iou = 0.0;
};

// Flags near-duplicate pairs (IoU strictly above iou_threshold) and
// zero-area boxes in the ground truth. The default threshold targets
// near-identical boxes only.
std::vector<Anomaly> audit_labels(const DatasetManifest& manifest,
                                  double iou_threshold = 0.9);

std::string describe(const Anomaly& anomaly, const ClassTable& classes);

void write_stats_table(std::ostream& out, const ClassStats& stats,
                       const ClassTable& classes);
void write_stats_csv(std::ostream& out, const ClassStats& stats,
                     const ClassTable& classes);

}  // namespace detkit
