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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "detkit/errors.hpp"
#include "detkit/geometry.hpp"

namespace detkit {

// One annotated object.
struct GroundTruthBox {
  int class_id = 0;
  BBox bbox;

  friend bool operator==(const GroundTruthBox&,
                         const GroundTruthBox&) = default;
};

// One model prediction.
struct Detection {
  int class_id = 0;
  BBox bbox;
  double confidence = 0.0;
  int model_id = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Ordered class-name table; the index is the class id.
class ClassTable {
 public:
  ClassTable() = default;
  explicit ClassTable(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::string& name(int class_id) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

struct ImageRecord {
  std::string id;
  int width = 0;
  int height = 0;
  std::string group_key;   // frame identifier; defaults to the image id
  std::string label_path;  // relative to the manifest directory; may be empty
};

struct DatasetManifest {
  std::vector<ImageRecord> images;
  ClassTable classes;
  std::filesystem::path base_dir;  // directory the manifest was loaded from

  const ImageRecord* find(std::string_view image_id) const;
  std::filesystem::path resolve_labels(const ImageRecord& image) const;
};

// Counts accumulated while parsing. Out-of-range coordinates are clamped to
// [0, 1] and counted here instead of rejected, since real label files are
// noisy.
struct ParseStats {
  std::size_t clamped_boxes = 0;
};

// Parses `class_id cx cy w h`. A class_count of 0 disables the upper-bound
// class check. Errors carry the file/line context.
GroundTruthBox parse_label_line(std::string_view line, int class_count = 0,
                                ParseStats* stats = nullptr,
                                std::string_view file = "<input>",
                                std::size_t line_no = 0);

// Parses `class_id cx cy w h confidence`.
Detection parse_prediction_line(std::string_view line, int model_id,
                                int class_count = 0,
                                ParseStats* stats = nullptr,
                                std::string_view file = "<input>",
                                std::size_t line_no = 0);

// One box per line, file order preserved. An empty file means zero boxes;
// any bad line aborts the read with its location.
std::vector<GroundTruthBox> read_label_file(const std::filesystem::path& path,
                                            int class_count = 0,
                                            ParseStats* stats = nullptr);
std::vector<Detection> read_prediction_file(const std::filesystem::path& path,
                                            int model_id, int class_count = 0,
                                            ParseStats* stats = nullptr);

// Fixed 6-decimal notation; output re-parses to the input within 1e-6.
void write_label_file(const std::filesystem::path& path,
                      const std::vector<GroundTruthBox>& boxes);
void write_prediction_file(const std::filesystem::path& path,
                           const std::vector<Detection>& detections);

// Plain-text class list: one name per line, line number = class id.
ClassTable read_class_names(const std::filesystem::path& path);

// JSON manifest:
//   {"classes": [...names...] | "names.txt",
//    "images": [{"id", "width", "height", "group"?, "labels"?}, ...]}
// Unknown keys are tolerated; duplicate image ids and missing required
// fields are rejected.
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace detkit
