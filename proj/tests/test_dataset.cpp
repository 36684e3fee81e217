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

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <doctest.h>

#include "test_util.hpp"

using namespace detkit;

namespace {

// In-memory manifest; label files live in tmp when boxes are given.
DatasetManifest make_manifest(
    const testing::TempDir& tmp, std::size_t image_count,
    std::size_t group_modulus,
    const std::vector<std::vector<GroundTruthBox>>& labels = {}) {
  DatasetManifest manifest;
  manifest.classes = ClassTable({"Car", "Bus", "Truck"});
  manifest.base_dir = tmp.path();
  for (std::size_t i = 0; i < image_count; ++i) {
    ImageRecord record;
    record.id = "img_" + std::to_string(i);
    record.width = 100;
    record.height = 100;
    record.group_key = "grp_" + std::to_string(i % group_modulus);
    if (i < labels.size()) {
      record.label_path = record.id + ".txt";
      write_label_file(tmp.path() / record.label_path, labels[i]);
    }
    manifest.images.push_back(std::move(record));
  }
  return manifest;
}

}  // namespace

TEST_CASE("class_stats counts boxes per class") {
  testing::TempDir tmp;
  const auto manifest = make_manifest(
      tmp, 2, 2,
      {{GroundTruthBox{0, BBox{0.1, 0.1, 0.2, 0.2}},
        GroundTruthBox{0, BBox{0.3, 0.3, 0.4, 0.4}},
        GroundTruthBox{2, BBox{0.5, 0.5, 0.6, 0.6}}},
       {GroundTruthBox{0, BBox{0.1, 0.1, 0.2, 0.2}}}});
  const auto stats = class_stats(manifest);
  CHECK(stats.counts == std::vector<std::size_t>{3, 0, 1});
  CHECK(stats.total == 4);
}

TEST_CASE("class_stats of an empty dataset is all zeros") {
  testing::TempDir tmp;
  const auto stats = class_stats(make_manifest(tmp, 0, 1));
  CHECK(stats.total == 0);
  CHECK(stats.counts == std::vector<std::size_t>{0, 0, 0});
}

TEST_CASE("class_stats names the unreadable file") {
  testing::TempDir tmp;
  auto manifest = make_manifest(tmp, 1, 1);
  manifest.images[0].label_path = "missing.txt";
  CHECK_THROWS_WITH_AS(class_stats(manifest), doctest::Contains("missing.txt"),
                       InputError);
}

TEST_CASE("split_folds deals singleton groups evenly") {
  testing::TempDir tmp;
  const auto manifest = make_manifest(tmp, 10, 10);
  const auto folds = split_folds(manifest, 5, 42);
  REQUIRE(folds.size() == 5);
  for (const auto& fold : folds) {
    CHECK(fold.val_ids.size() == 2);
    CHECK(fold.train_ids.size() == 8);
  }
}

TEST_CASE("images of one group stay on the same side of every fold") {
  testing::TempDir tmp;
  const auto manifest = make_manifest(tmp, 12, 4);  // 4 groups of 3 images
  const auto folds = split_folds(manifest, 3, 7);
  for (const auto& fold : folds) {
    std::set<std::string> train(fold.train_ids.begin(), fold.train_ids.end());
    std::set<std::string> val(fold.val_ids.begin(), fold.val_ids.end());
    for (const auto& image : manifest.images) {
      const bool in_train = train.count(image.id) > 0;
      const bool in_val = val.count(image.id) > 0;
      CHECK(in_train != in_val);  // disjoint and covering
    }
    // group purity
    std::set<std::string> train_groups, val_groups;
    for (const auto& image : manifest.images) {
      (train.count(image.id) ? train_groups : val_groups)
          .insert(image.group_key);
    }
    for (const auto& group : train_groups) {
      CHECK(val_groups.count(group) == 0);
    }
  }
}

TEST_CASE("every group validates exactly once across folds") {
  testing::TempDir tmp;
  const auto manifest = make_manifest(tmp, 30, 10);
  const auto folds = split_folds(manifest, 4, 1);
  std::map<std::string, int> validated;
  for (const auto& fold : folds) {
    std::set<std::string> val_groups;
    for (const auto& id : fold.val_ids) {
      val_groups.insert(manifest.find(id)->group_key);
    }
    for (const auto& group : val_groups) ++validated[group];
  }
  CHECK(validated.size() == 10);
  for (const auto& [group, count] : validated) CHECK(count == 1);
}

TEST_CASE("split_folds is deterministic per seed") {
  testing::TempDir tmp;
  const auto manifest = make_manifest(tmp, 40, 20);
  const auto a = split_folds(manifest, 4, 1234);
  const auto b = split_folds(manifest, 4, 1234);
  const auto c = split_folds(manifest, 4, 5678);
  REQUIRE(a.size() == b.size());
  bool all_equal_ac = true;
  for (std::size_t f = 0; f < a.size(); ++f) {
    CHECK(a[f].train_ids == b[f].train_ids);
    CHECK(a[f].val_ids == b[f].val_ids);
    if (a[f].val_ids != c[f].val_ids) all_equal_ac = false;
  }
  CHECK_FALSE(all_equal_ac);  // different seed shuffles differently
}

TEST_CASE("fold count must fit the group count") {
  testing::TempDir tmp;
  const auto manifest = make_manifest(tmp, 6, 1);  // one group only
  CHECK_THROWS_AS(split_folds(manifest, 2, 0), InputError);
  CHECK_THROWS_AS(split_folds(make_manifest(tmp, 6, 3), 1, 0), InputError);
}

TEST_CASE("write_folds emits one file per fold per side") {
  testing::TempDir tmp;
  const auto manifest = make_manifest(tmp, 8, 8);
  const auto folds = split_folds(manifest, 4, 9);
  const auto out_dir = tmp.path() / "folds";
  write_folds(folds, out_dir);
  for (std::size_t f = 0; f < 4; ++f) {
    const auto stem = "fold_" + std::to_string(f);
    CHECK(std::filesystem::exists(out_dir / (stem + "_train.txt")));
    CHECK(std::filesystem::exists(out_dir / (stem + "_val.txt")));
  }
  std::ifstream in(out_dir / "fold_0_val.txt");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == folds[0].val_ids.size());
}

TEST_CASE("audit flags conflicting, duplicate and degenerate labels") {
  testing::TempDir tmp;
  const BBox shared{0.2, 0.2, 0.6, 0.6};
  const auto manifest = make_manifest(
      tmp, 3, 3,
      {// same box labeled Truck and Car: conflict
       {GroundTruthBox{2, shared}, GroundTruthBox{0, shared}},
       // same box twice with one class: duplicate
       {GroundTruthBox{1, shared}, GroundTruthBox{1, shared}},
       // zero-width box: degenerate
       {GroundTruthBox{0, BBox{0.3, 0.2, 0.3, 0.8}}}});
  const auto anomalies = audit_labels(manifest, 0.9);
  REQUIRE(anomalies.size() == 3);
  CHECK(anomalies[0].kind == AnomalyKind::kConflictingLabel);
  CHECK(anomalies[0].image_id == "img_0");
  CHECK(anomalies[1].kind == AnomalyKind::kDuplicateLabel);
  CHECK(anomalies[2].kind == AnomalyKind::kDegenerateBox);
  const auto text = describe(anomalies[0], manifest.classes);
  CHECK(text.find("Truck") != std::string::npos);
  CHECK(text.find("Car") != std::string::npos);
}

TEST_CASE("audit of clean labels is empty") {
  testing::TempDir tmp;
  const auto manifest = make_manifest(
      tmp, 2, 2,
      {{GroundTruthBox{0, BBox{0.1, 0.1, 0.3, 0.3}},
        GroundTruthBox{1, BBox{0.5, 0.5, 0.8, 0.8}}},
       {GroundTruthBox{2, BBox{0.2, 0.2, 0.4, 0.4}}}});
  CHECK(audit_labels(manifest, 0.9).empty());
}

TEST_CASE("stats table and csv mention every class") {
  testing::TempDir tmp;
  const auto manifest =
      make_manifest(tmp, 1, 1, {{GroundTruthBox{0, BBox{0.1, 0.1, 0.3, 0.3}}}});
  const auto stats = class_stats(manifest);
  std::ostringstream table;
  write_stats_table(table, stats, manifest.classes);
  CHECK(table.str().find("Class Name") != std::string::npos);
  CHECK(table.str().find("Car") != std::string::npos);
  CHECK(table.str().find("Total") != std::string::npos);
  std::ostringstream csv;
  write_stats_csv(csv, stats, manifest.classes);
  CHECK(csv.str().rfind("class_id,class_name,label_count\n", 0) == 0);
  CHECK(csv.str().find("0,Car,1") != std::string::npos);
}
