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
#include "detkit/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "detkit/rng.hpp"

namespace detkit {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFoldShuffleStream = 0x464f4c44;  // "FOLD"

}  // namespace

ClassStats class_stats(const DatasetManifest& manifest) {
  ClassStats stats;
  stats.counts.assign(manifest.classes.size(), 0);
  const int class_count = static_cast<int>(manifest.classes.size());
  for (const auto& image : manifest.images) {
    if (image.label_path.empty()) continue;
    const auto boxes =
        read_label_file(manifest.resolve_labels(image), class_count);
    for (const auto& gt : boxes) {
      ++stats.counts[static_cast<std::size_t>(gt.class_id)];
    }
  }
  stats.total = std::accumulate(stats.counts.begin(), stats.counts.end(),
                                std::size_t{0});
  return stats;
}

std::vector<FoldSpec> split_folds(const DatasetManifest& manifest,
                                  std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InputError("fold count must be at least 2");

  // Group order = first appearance in the manifest, so the permutation is a
  // pure function of (manifest, seed).
  std::vector<std::string> groups;
  std::unordered_map<std::string, std::size_t> group_index;
  for (const auto& image : manifest.images) {
    const auto [it, inserted] =
        group_index.try_emplace(image.group_key, groups.size());
    if (inserted) groups.push_back(image.group_key);
  }
  if (groups.size() < k) {
    throw InputError("fold count " + std::to_string(k) + " exceeds the " +
                     std::to_string(groups.size()) + " distinct frame groups");
  }

  std::vector<std::size_t> perm(groups.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  KeyedRng rng({kFoldShuffleStream, seed});
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  }

  std::vector<std::size_t> bucket_of(groups.size());
  for (std::size_t position = 0; position < perm.size(); ++position) {
    bucket_of[perm[position]] = position % k;
  }

  std::vector<FoldSpec> folds(k);
  for (std::size_t f = 0; f < k; ++f) folds[f].fold_index = f;
  for (const auto& image : manifest.images) {
    const std::size_t bucket = bucket_of[group_index.at(image.group_key)];
    for (std::size_t f = 0; f < k; ++f) {
      auto& side = bucket == f ? folds[f].val_ids : folds[f].train_ids;
      side.push_back(image.id);
    }
  }
  return folds;
}

void write_folds(const std::vector<FoldSpec>& folds, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& fold : folds) {
    const std::string stem = "fold_" + std::to_string(fold.fold_index);
    for (const auto& [suffix, ids] :
         {std::pair{"_train.txt", &fold.train_ids},
          std::pair{"_val.txt", &fold.val_ids}}) {
      const fs::path path = out_dir / (stem + suffix);
      std::ofstream out(path, std::ios::trunc);
      if (!out) {
        throw InputError("cannot open " + path.string() + " for writing");
      }
      for (const auto& id : *ids) out << id << '\n';
      out.flush();
      if (!out) throw InputError("I/O failure while writing " + path.string());
    }
  }
}

std::vector<Anomaly> audit_labels(const DatasetManifest& manifest,
                                  double iou_threshold) {
  const int class_count = static_cast<int>(manifest.classes.size());
  std::vector<Anomaly> anomalies;
  for (const auto& image : manifest.images) {
    if (image.label_path.empty()) continue;
    const auto boxes =
        read_label_file(manifest.resolve_labels(image), class_count);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (area(boxes[i].bbox) == 0.0) {
        Anomaly anomaly;
        anomaly.image_id = image.id;
        anomaly.kind = AnomalyKind::kDegenerateBox;
        anomaly.box_a = i;
        anomaly.class_a = anomaly.class_b = boxes[i].class_id;
        anomalies.push_back(std::move(anomaly));
      }
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        const double v = iou(boxes[i].bbox, boxes[j].bbox);
        if (v <= iou_threshold) continue;
        Anomaly anomaly;
        anomaly.image_id = image.id;
        anomaly.kind = boxes[i].class_id == boxes[j].class_id
                           ? AnomalyKind::kDuplicateLabel
                           : AnomalyKind::kConflictingLabel;
        anomaly.box_a = i;
        anomaly.box_b = j;
        anomaly.class_a = boxes[i].class_id;
        anomaly.class_b = boxes[j].class_id;
        anomaly.iou = v;
        anomalies.push_back(std::move(anomaly));
      }
    }
  }
  return anomalies;
}

std::string describe(const Anomaly& anomaly, const ClassTable& classes) {
  std::ostringstream out;
  out << anomaly.image_id << ": ";
  switch (anomaly.kind) {
    case AnomalyKind::kDegenerateBox:
      out << "degenerate box " << anomaly.box_a << " ("
          << classes.name(anomaly.class_a) << "), zero area";
      break;
    case AnomalyKind::kDuplicateLabel:
      out << "duplicate label: boxes " << anomaly.box_a << " and "
          << *anomaly.box_b << " (" << classes.name(anomaly.class_a)
          << "), IoU " << std::fixed << std::setprecision(3) << anomaly.iou;
      break;
    case AnomalyKind::kConflictingLabel:
      out << "conflicting label: box " << anomaly.box_a << " ("
          << classes.name(anomaly.class_a) << ") vs box " << *anomaly.box_b
          << " (" << classes.name(anomaly.class_b) << "), IoU " << std::fixed
          << std::setprecision(3) << anomaly.iou;
      break;
  }
  return out.str();
}

void write_stats_table(std::ostream& out, const ClassStats& stats,
                       const ClassTable& classes) {
  std::size_t name_width = std::string("Class Name").size();
  for (const auto& name : classes.names()) {
    name_width = std::max(name_width, name.size());
  }
  out << std::left << std::setw(static_cast<int>(name_width) + 2)
      << "Class Name" << std::right << std::setw(12) << "Label Count" << "\n";
  for (std::size_t c = 0; c < classes.size(); ++c) {
    out << std::left << std::setw(static_cast<int>(name_width) + 2)
        << classes.names()[c] << std::right << std::setw(12)
        << stats.counts[c] << "\n";
  }
  out << std::left << std::setw(static_cast<int>(name_width) + 2) << "Total"
      << std::right << std::setw(12) << stats.total << "\n";
}

namespace {

std::string csv_escape(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string escaped = "\"";
  for (const char c : value) {
    if (c == '"') escaped += '"';
    escaped += c;
  }
  escaped += '"';
  return escaped;
}

}  // namespace

void write_stats_csv(std::ostream& out, const ClassStats& stats,
                     const ClassTable& classes) {
  out << "class_id,class_name,label_count\n";
  for (std::size_t c = 0; c < classes.size(); ++c) {
    out << c << ',' << csv_escape(classes.names()[c]) << ','
        << stats.counts[c] << "\n";
  }
}

}  // namespace detkit
