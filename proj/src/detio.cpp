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
#include "detkit/detio.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <unordered_set>
#include <utility>

#include <json.hpp>

namespace detkit {

namespace fs = std::filesystem;

ClassTable::ClassTable(std::vector<std::string> names)
    : names_(std::move(names)) {
  std::unordered_set<std::string_view> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw InputError("class table: empty class name");
    if (!seen.insert(name).second) {
      throw InputError("class table: duplicate class name '" + name + "'");
    }
  }
}

const std::string& ClassTable::name(int class_id) const {
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= names_.size()) {
    throw InputError("class id " + std::to_string(class_id) +
                     " outside class table of size " +
                     std::to_string(names_.size()));
  }
  return names_[static_cast<std::size_t>(class_id)];
}

const ImageRecord* DatasetManifest::find(std::string_view image_id) const {
  for (const auto& image : images) {
    if (image.id == image_id) return &image;
  }
  return nullptr;
}

fs::path DatasetManifest::resolve_labels(const ImageRecord& image) const {
  fs::path path = image.label_path;
  if (path.is_absolute() || base_dir.empty()) return path;
  return base_dir / path;
}

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r';
  };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

[[noreturn]] void fail(std::string_view file, std::size_t line_no,
                       const std::string& message) {
  throw ParseError(std::string(file), line_no, message);
}

double parse_double(std::string_view token, std::string_view file,
                    std::size_t line_no) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    fail(file, line_no,
         "expected a decimal number, got '" + std::string(token) + "'");
  }
  return value;
}

int parse_class_id(std::string_view token, int class_count,
                   std::string_view file, std::size_t line_no) {
  int value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    fail(file, line_no,
         "expected an integer class id, got '" + std::string(token) + "'");
  }
  if (value < 0 || (class_count > 0 && value >= class_count)) {
    fail(file, line_no, "class id " + std::to_string(value) +
                            " out of range [0, " +
                            std::to_string(class_count) + ")");
  }
  return value;
}

// Center-form coordinates from four tokens, converted to corners and clamped.
BBox parse_box(const std::vector<std::string_view>& tokens, ParseStats* stats,
               std::string_view file, std::size_t line_no) {
  YoloBox y{parse_double(tokens[1], file, line_no),
            parse_double(tokens[2], file, line_no),
            parse_double(tokens[3], file, line_no),
            parse_double(tokens[4], file, line_no)};
  bool clamped = false;
  if (y.w < 0.0) {
    y.w = 0.0;
    clamped = true;
  }
  if (y.h < 0.0) {
    y.h = 0.0;
    clamped = true;
  }
  const BBox raw{y.cx - y.w / 2.0, y.cy - y.h / 2.0, y.cx + y.w / 2.0,
                 y.cy + y.h / 2.0};
  const BBox clipped = clip_to_unit(raw);
  if (stats && (clamped || !(raw == clipped))) ++stats->clamped_boxes;
  return clipped;
}

}  // namespace

GroundTruthBox parse_label_line(std::string_view line, int class_count,
                                ParseStats* stats, std::string_view file,
                                std::size_t line_no) {
  const auto tokens = split_tokens(line);
  if (tokens.size() != 5) {
    fail(file, line_no,
         "expected 5 tokens (class cx cy w h), got " +
             std::to_string(tokens.size()));
  }
  GroundTruthBox gt;
  gt.class_id = parse_class_id(tokens[0], class_count, file, line_no);
  gt.bbox = parse_box(tokens, stats, file, line_no);
  return gt;
}

Detection parse_prediction_line(std::string_view line, int model_id,
                                int class_count, ParseStats* stats,
                                std::string_view file, std::size_t line_no) {
  const auto tokens = split_tokens(line);
  if (tokens.size() != 6) {
    fail(file, line_no,
         "expected 6 tokens (class cx cy w h confidence), got " +
             std::to_string(tokens.size()));
  }
  Detection det;
  det.class_id = parse_class_id(tokens[0], class_count, file, line_no);
  det.bbox = parse_box(tokens, stats, file, line_no);
  det.confidence = parse_double(tokens[5], file, line_no);
  if (det.confidence < 0.0 || det.confidence > 1.0) {
    fail(file, line_no,
         "confidence " + std::string(tokens[5]) + " outside [0, 1]");
  }
  det.model_id = model_id;
  return det;
}

namespace {

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

template <typename Parse>
auto read_box_file(const fs::path& path, Parse parse)
    -> std::vector<decltype(parse(std::string_view{}, std::size_t{}))> {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::vector<decltype(parse(std::string_view{}, std::size_t{}))> boxes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    boxes.push_back(parse(line, line_no));
  }
  if (in.bad()) throw InputError("I/O error while reading " + path.string());
  return boxes;
}

}  // namespace

std::vector<GroundTruthBox> read_label_file(const fs::path& path,
                                            int class_count,
                                            ParseStats* stats) {
  const std::string name = path.string();
  return read_box_file(path, [&](std::string_view line, std::size_t line_no) {
    return parse_label_line(line, class_count, stats, name, line_no);
  });
}

std::vector<Detection> read_prediction_file(const fs::path& path, int model_id,
                                            int class_count,
                                            ParseStats* stats) {
  const std::string name = path.string();
  return read_box_file(path, [&](std::string_view line, std::size_t line_no) {
    return parse_prediction_line(line, model_id, class_count, stats, name,
                                 line_no);
  });
}

namespace {

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw InputError("cannot open " + path.string() + " for writing");
  }
  out << std::fixed << std::setprecision(6);
  return out;
}

void finish_write(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw InputError("I/O failure while writing " + path.string());
}

}  // namespace

void write_label_file(const fs::path& path,
                      const std::vector<GroundTruthBox>& boxes) {
  auto out = open_for_write(path);
  for (const auto& gt : boxes) {
    const YoloBox y = corner_to_yolo(gt.bbox);
    out << gt.class_id << ' ' << y.cx << ' ' << y.cy << ' ' << y.w << ' '
        << y.h << '\n';
  }
  finish_write(out, path);
}

void write_prediction_file(const fs::path& path,
                           const std::vector<Detection>& detections) {
  auto out = open_for_write(path);
  for (const auto& det : detections) {
    const YoloBox y = corner_to_yolo(det.bbox);
    out << det.class_id << ' ' << y.cx << ' ' << y.cy << ' ' << y.w << ' '
        << y.h << ' ' << det.confidence << '\n';
  }
  finish_write(out, path);
}

ClassTable read_class_names(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open class-name file: " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                             line.back() == '\t')) {
      line.pop_back();
    }
    names.push_back(line);
  }
  while (!names.empty() && names.back().empty()) names.pop_back();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) {
      throw ParseError(path.string(), i + 1,
                       "blank line inside the class-name list");
    }
  }
  return ClassTable(std::move(names));
}

namespace {

using nlohmann::json;

const json& require_key(const json& object, const char* key,
                        const std::string& where) {
  const auto it = object.find(key);
  if (it == object.end()) {
    throw InputError(where + ": missing required key '" + std::string(key) +
                     "'");
  }
  return *it;
}

std::string require_string(const json& object, const char* key,
                           const std::string& where) {
  const json& node = require_key(object, key, where);
  if (!node.is_string()) {
    throw InputError(where + ": key '" + key + "' must be a string");
  }
  return node.get<std::string>();
}

int require_positive_int(const json& object, const char* key,
                         const std::string& where) {
  const json& node = require_key(object, key, where);
  if (!node.is_number_integer() && !node.is_number_unsigned()) {
    throw InputError(where + ": key '" + key + "' must be an integer");
  }
  const long long value = node.get<long long>();
  if (value <= 0) {
    throw InputError(where + ": key '" + key + "' must be positive");
  }
  return static_cast<int>(value);
}

std::string optional_string(const json& object, const char* key,
                            const std::string& where,
                            const std::string& fallback) {
  const auto it = object.find(key);
  if (it == object.end()) return fallback;
  if (!it->is_string()) {
    throw InputError(where + ": key '" + key + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("manifest " + path.string() + ": " + e.what());
  }
  const std::string where = "manifest " + path.string();
  if (!doc.is_object()) throw InputError(where + ": not a JSON object");

  DatasetManifest manifest;
  manifest.base_dir =
      path.has_parent_path() ? path.parent_path() : fs::path(".");

  const json& classes = require_key(doc, "classes", where);
  if (classes.is_string()) {
    fs::path names_path = classes.get<std::string>();
    if (!names_path.is_absolute()) names_path = manifest.base_dir / names_path;
    manifest.classes = read_class_names(names_path);
  } else if (classes.is_array()) {
    std::vector<std::string> names;
    names.reserve(classes.size());
    for (const auto& item : classes) {
      if (!item.is_string()) {
        throw InputError(where + ": 'classes' entries must be strings");
      }
      names.push_back(item.get<std::string>());
    }
    manifest.classes = ClassTable(std::move(names));
  } else {
    throw InputError(where +
                     ": 'classes' must be an array of names or a file path");
  }

  const json& images = require_key(doc, "images", where);
  if (!images.is_array()) {
    throw InputError(where + ": 'images' must be an array");
  }
  std::unordered_set<std::string> seen_ids;
  for (const auto& item : images) {
    if (!item.is_object()) {
      throw InputError(where + ": image entries must be objects");
    }
    ImageRecord record;
    record.id = require_string(item, "id", where);
    if (!seen_ids.insert(record.id).second) {
      throw InputError(where + ": duplicate image id '" + record.id + "'");
    }
    record.width = require_positive_int(item, "width", where);
    record.height = require_positive_int(item, "height", where);
    record.group_key = optional_string(item, "group", where, record.id);
    record.label_path = optional_string(item, "labels", where, "");
    manifest.images.push_back(std::move(record));
  }
  return manifest;
}

}  // namespace detkit
