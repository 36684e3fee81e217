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
#include "detkit/simulate.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "detkit/eval.hpp"
#include "detkit/parallel.hpp"
#include "detkit/rng.hpp"

namespace detkit {

namespace fs = std::filesystem;

namespace {

// Stream tags keep every consumer of a seed on its own substream.
constexpr std::uint64_t kSceneCountStream = 0x53434e31;  // "SCN1"
constexpr std::uint64_t kSceneBoxStream = 0x53434e32;    // "SCN2"
constexpr std::uint64_t kDetectStream = 0x44455431;      // "DET1"
constexpr std::uint64_t kDetectFpCountStream = 0x44455432;
constexpr std::uint64_t kDetectFpStream = 0x44455433;

constexpr int kMaxPlacementAttempts = 100;

}  // namespace

const std::vector<std::string>& default_class_names() {
  static const std::vector<std::string> names = {
      "Ambulance",    "Army Vehicle", "Auto Rickshaw",
      "Bicycle",      "Bus",          "Car",
      "Garbage Van",  "Human Hauler", "Minibus",
      "Minivan",      "Motorbike",    "Pickup",
      "Police Car",   "Rickshaw",     "Scooter",
      "SUV",          "Taxi",         "Three Wheeler (CNG)",
      "Truck",        "Van",          "Wheelbarrow"};
  return names;
}

const std::vector<double>& default_class_weights() {
  // Relative label frequencies of the 21 stock classes.
  static const std::vector<double> weights = {
      76,  25,   465, 465, 3340, 5574, 8,    170, 100, 815, 2252,
      1178, 33, 3495, 30,  667,  59,   2982, 1475, 682, 251};
  return weights;
}

namespace {

void validate_range(const ValueRange& range, const char* what) {
  if (!(range.lo <= range.hi)) {
    throw InputError(std::string(what) + ": lo must not exceed hi");
  }
}

const std::vector<double>& effective_weights(const SceneConfig& cfg) {
  return cfg.class_weights.empty() ? default_class_weights()
                                   : cfg.class_weights;
}

}  // namespace

void validate(const SceneConfig& cfg) {
  if (cfg.image_count < 0) throw InputError("scene: image_count must be >= 0");
  if (cfg.boxes_per_image.lo < 0 ||
      cfg.boxes_per_image.lo > cfg.boxes_per_image.hi) {
    throw InputError("scene: boxes_per_image must be a non-negative range");
  }
  validate_range(cfg.box_size, "scene: box_size");
  if (!(cfg.box_size.lo > 0.0 && cfg.box_size.hi <= 1.0)) {
    throw InputError("scene: box_size must lie in (0, 1]");
  }
  if (!(cfg.overlap_allowance >= 0.0 && cfg.overlap_allowance <= 1.0)) {
    throw InputError("scene: overlap_allowance must lie in [0, 1]");
  }
  if (cfg.image_width <= 0 || cfg.image_height <= 0) {
    throw InputError("scene: image dimensions must be positive");
  }
  if (cfg.group_size < 1) throw InputError("scene: group_size must be >= 1");
  const auto& weights = effective_weights(cfg);
  if (weights.empty()) throw InputError("scene: class_weights must not be empty");
  double sum = 0.0;
  for (const double w : weights) {
    if (w < 0.0) throw InputError("scene: class_weights must be non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) {
    throw InputError("scene: class_weights must have a positive sum");
  }
}

void validate(const DetectorProfile& profile) {
  const auto check_probability = [](double value, const char* what) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw InputError(std::string("detector: ") + what +
                       " must lie in [0, 1]");
    }
  };
  check_probability(profile.miss_rate, "miss_rate");
  check_probability(profile.class_confusion_rate, "class_confusion_rate");
  if (profile.jitter_sigma < 0.0) {
    throw InputError("detector: jitter_sigma must be >= 0");
  }
  if (profile.false_positive_rate < 0.0) {
    throw InputError("detector: false_positive_rate must be >= 0");
  }
  if (profile.confidence.noise_sigma < 0.0) {
    throw InputError("detector: confidence noise_sigma must be >= 0");
  }
  validate_range(profile.fp_confidence, "detector: fp_confidence");
  check_probability(profile.fp_confidence.lo, "fp_confidence.lo");
  check_probability(profile.fp_confidence.hi, "fp_confidence.hi");
  validate_range(profile.fp_box_size, "detector: fp_box_size");
  if (!(profile.fp_box_size.lo > 0.0 && profile.fp_box_size.hi <= 1.0)) {
    throw InputError("detector: fp_box_size must lie in (0, 1]");
  }
}

namespace {

BBox random_box(KeyedRng& rng, const ValueRange& size) {
  const double w = rng.uniform(size.lo, size.hi);
  const double h = rng.uniform(size.lo, size.hi);
  const double cx = rng.uniform(w / 2.0, 1.0 - w / 2.0);
  const double cy = rng.uniform(h / 2.0, 1.0 - h / 2.0);
  return BBox{cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
}

}  // namespace

std::vector<GroundTruthBox> generate_scene(const SceneConfig& cfg,
                                           int image_index) {
  validate(cfg);
  const auto& weights = effective_weights(cfg);
  const auto image = static_cast<std::uint64_t>(image_index);

  KeyedRng count_rng({kSceneCountStream, cfg.seed, image});
  const int span = cfg.boxes_per_image.hi - cfg.boxes_per_image.lo;
  const int count =
      cfg.boxes_per_image.lo +
      (span > 0 ? static_cast<int>(count_rng.uniform_index(
                      static_cast<std::size_t>(span) + 1))
                : 0);

  std::vector<GroundTruthBox> boxes;
  boxes.reserve(static_cast<std::size_t>(count));
  for (int b = 0; b < count; ++b) {
    KeyedRng rng({kSceneBoxStream, cfg.seed, image,
                  static_cast<std::uint64_t>(b)});
    GroundTruthBox gt;
    gt.class_id = static_cast<int>(rng.weighted_index(weights));
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed;
         ++attempt) {
      const BBox candidate = random_box(rng, cfg.box_size);
      bool clear = true;
      for (const auto& existing : boxes) {
        if (iou(existing.bbox, candidate) > cfg.overlap_allowance) {
          clear = false;
          break;
        }
      }
      if (clear) {
        gt.bbox = candidate;
        placed = true;
      }
    }
    if (!placed) {
      throw InputError(
          "scene generation: could not place box " + std::to_string(b) +
          " of image " + std::to_string(image_index) + " within " +
          std::to_string(kMaxPlacementAttempts) +
          " attempts; raise overlap_allowance, shrink box_size, or lower "
          "boxes_per_image");
    }
    boxes.push_back(gt);
  }
  return boxes;
}

std::vector<Detection> simulate_detector(const std::vector<GroundTruthBox>& gts,
                                         const DetectorProfile& profile,
                                         int model_id, int image_index,
                                         int class_count) {
  validate(profile);
  if (class_count <= 0) {
    throw InputError("simulate_detector: class count must be positive");
  }
  const auto model = static_cast<std::uint64_t>(model_id);
  const auto image = static_cast<std::uint64_t>(image_index);

  std::vector<Detection> detections;
  for (std::size_t b = 0; b < gts.size(); ++b) {
    KeyedRng rng({kDetectStream, profile.seed_offset, model, image,
                  static_cast<std::uint64_t>(b)});
    // The miss decision is the first draw, so raising miss_rate can only
    // turn emissions off while every other stream stays untouched.
    if (rng.uniform() < profile.miss_rate) continue;

    const BBox& gt = gts[b].bbox;
    const double dx_min = rng.normal(0.0, profile.jitter_sigma);
    const double dy_min = rng.normal(0.0, profile.jitter_sigma);
    const double dx_max = rng.normal(0.0, profile.jitter_sigma);
    const double dy_max = rng.normal(0.0, profile.jitter_sigma);
    BBox noisy{gt.x_min + dx_min, gt.y_min + dy_min, gt.x_max + dx_max,
               gt.y_max + dy_max};
    if (noisy.x_min > noisy.x_max) std::swap(noisy.x_min, noisy.x_max);
    if (noisy.y_min > noisy.y_max) std::swap(noisy.y_min, noisy.y_max);
    noisy = clip_to_unit(noisy);

    int class_id = gts[b].class_id;
    if (class_count > 1 &&
        rng.uniform() < profile.class_confusion_rate) {
      const auto shift =
          rng.uniform_index(static_cast<std::size_t>(class_count) - 1);
      class_id = (class_id + 1 + static_cast<int>(shift)) % class_count;
    }

    const double mean_offset = (std::abs(dx_min) + std::abs(dy_min) +
                                std::abs(dx_max) + std::abs(dy_max)) /
                               4.0;
    const double confidence = std::clamp(
        profile.confidence.base - profile.confidence.penalty * mean_offset +
            rng.normal(0.0, profile.confidence.noise_sigma),
        0.0, 1.0);
    detections.push_back(Detection{class_id, noisy, confidence, model_id});
  }

  KeyedRng fp_count_rng(
      {kDetectFpCountStream, profile.seed_offset, model, image});
  const int fp_count = fp_count_rng.poisson(profile.false_positive_rate);
  for (int f = 0; f < fp_count; ++f) {
    KeyedRng rng({kDetectFpStream, profile.seed_offset, model, image,
                  static_cast<std::uint64_t>(f)});
    const BBox box = random_box(rng, profile.fp_box_size);
    const int class_id =
        static_cast<int>(rng.uniform_index(static_cast<std::size_t>(class_count)));
    const double confidence =
        rng.uniform(profile.fp_confidence.lo, profile.fp_confidence.hi);
    detections.push_back(Detection{class_id, box, confidence, model_id});
  }
  return detections;
}

std::vector<DetectorProfile> ExperimentConfig::resolved_detectors() const {
  std::vector<DetectorProfile> profiles = detectors;
  if (profiles.empty()) profiles.resize(4);
  for (std::size_t d = 0; d < profiles.size(); ++d) {
    if (profiles[d].name.empty()) {
      profiles[d].name = "detector_" + std::to_string(d + 1);
    }
  }
  return profiles;
}

int ExperimentConfig::class_count() const {
  return static_cast<int>(effective_weights(scene).size());
}

ExperimentReport run_ensemble_experiment(const ExperimentConfig& cfg,
                                         unsigned threads) {
  validate(cfg.scene);
  const auto profiles = cfg.resolved_detectors();
  for (const auto& profile : profiles) validate(profile);
  cfg.fusion.validate();
  if (cfg.runs < 1) throw InputError("experiment: runs must be >= 1");
  if (!(cfg.eval_iou > 0.0 && cfg.eval_iou <= 1.0)) {
    throw InputError("experiment: eval_iou must lie in (0, 1]");
  }
  const int class_count = cfg.class_count();
  const auto runs = static_cast<std::size_t>(cfg.runs);
  const auto image_count = static_cast<std::size_t>(cfg.scene.image_count);

  struct RunScores {
    std::vector<double> singles;
    double fused = 0.0;
  };
  std::vector<RunScores> scores(runs);

  parallel_for(runs, threads, [&](std::size_t r) {
    SceneConfig scene = cfg.scene;
    scene.seed = cfg.scene.seed + r;
    std::vector<DetectorProfile> run_profiles = profiles;
    for (auto& profile : run_profiles) profile.seed_offset += r;

    std::vector<ImageSample> fused_samples(image_count);
    std::vector<std::vector<ImageSample>> single_samples(
        run_profiles.size(), std::vector<ImageSample>(image_count));
    for (std::size_t i = 0; i < image_count; ++i) {
      const auto gts = generate_scene(scene, static_cast<int>(i));
      std::vector<std::vector<Detection>> per_model;
      per_model.reserve(run_profiles.size());
      for (std::size_t d = 0; d < run_profiles.size(); ++d) {
        per_model.push_back(simulate_detector(gts, run_profiles[d],
                                              static_cast<int>(d),
                                              static_cast<int>(i),
                                              class_count));
      }
      // Singles pass through the same confidence filter and NMS as the
      // ensemble so the comparison isolates the fusion step.
      for (std::size_t d = 0; d < run_profiles.size(); ++d) {
        single_samples[d][i].gts = gts;
        single_samples[d][i].preds =
            ensemble_fuse({per_model[d]}, cfg.fusion);
      }
      fused_samples[i].gts = gts;
      fused_samples[i].preds = ensemble_fuse(per_model, cfg.fusion);
    }

    RunScores run_scores;
    for (std::size_t d = 0; d < run_profiles.size(); ++d) {
      run_scores.singles.push_back(map_of(
          evaluate_classes(single_samples[d], class_count, cfg.eval_iou)));
    }
    run_scores.fused =
        map_of(evaluate_classes(fused_samples, class_count, cfg.eval_iou));
    scores[r] = std::move(run_scores);
  });

  ExperimentReport report;
  report.eval_iou = cfg.eval_iou;
  report.runs = cfg.runs;
  report.rows.resize(profiles.size() + 1);
  for (std::size_t d = 0; d < profiles.size(); ++d) {
    report.rows[d].name = profiles[d].name;
  }
  report.rows.back().name = "NMS ensemble";
  for (std::size_t r = 0; r < runs; ++r) {
    bool win = true;
    for (std::size_t d = 0; d < profiles.size(); ++d) {
      report.rows[d].mean_map += scores[r].singles[d];
      if (!(scores[r].fused > scores[r].singles[d])) win = false;
    }
    report.rows.back().mean_map += scores[r].fused;
    report.run_wins.push_back(win ? 1 : 0);
    report.wins += win ? 1 : 0;
  }
  for (auto& row : report.rows) {
    row.mean_map /= static_cast<double>(runs);
  }
  return report;
}

void write_experiment_table(std::ostream& out,
                            const ExperimentReport& report) {
  std::size_t name_width = std::string("Model Name").size();
  for (const auto& row : report.rows) {
    name_width = std::max(name_width, row.name.size());
  }
  std::ostringstream header;
  header << "mAP@" << std::fixed << std::setprecision(2) << report.eval_iou;
  out << std::left << std::setw(static_cast<int>(name_width) + 2)
      << "Model Name" << std::right << std::setw(10) << header.str() << "\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& row : report.rows) {
    out << std::left << std::setw(static_cast<int>(name_width) + 2)
        << row.name << std::right << std::setw(10) << row.mean_map << "\n";
  }
  out << "\nensemble wins: " << report.wins << "/" << report.runs
      << " runs\n";
  out << "per-run tally: ";
  for (const auto win : report.run_wins) out << (win ? 'W' : 'L');
  out << "\n";
}

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& path,
                              const std::string& message) {
  throw InputError("config: key '" + path + "': " + message);
}

double get_number(const json& node, const std::string& path) {
  if (!node.is_number()) config_fail(path, "expected a number");
  return node.get<double>();
}

int get_integer(const json& node, const std::string& path) {
  if (!node.is_number_integer() && !node.is_number_unsigned()) {
    config_fail(path, "expected an integer");
  }
  return node.get<int>();
}

std::uint64_t get_u64(const json& node, const std::string& path) {
  if (!node.is_number_integer() && !node.is_number_unsigned()) {
    config_fail(path, "expected an integer");
  }
  const auto value = node.get<long long>();
  if (value < 0) config_fail(path, "expected a non-negative integer");
  return static_cast<std::uint64_t>(value);
}

bool get_bool(const json& node, const std::string& path) {
  if (!node.is_boolean()) config_fail(path, "expected true or false");
  return node.get<bool>();
}

std::string get_string(const json& node, const std::string& path) {
  if (!node.is_string()) config_fail(path, "expected a string");
  return node.get<std::string>();
}

ValueRange get_value_range(const json& node, const std::string& path) {
  if (!node.is_array() || node.size() != 2) {
    config_fail(path, "expected a [lo, hi] pair");
  }
  return ValueRange{get_number(node[0], path + "[0]"),
                    get_number(node[1], path + "[1]")};
}

CountRange get_count_range(const json& node, const std::string& path) {
  if (!node.is_array() || node.size() != 2) {
    config_fail(path, "expected a [lo, hi] pair");
  }
  return CountRange{get_integer(node[0], path + "[0]"),
                    get_integer(node[1], path + "[1]")};
}

const json* maybe(const json& object, const char* key) {
  const auto it = object.find(key);
  return it == object.end() ? nullptr : &*it;
}

SceneConfig parse_scene(const json& node, const std::string& path) {
  if (!node.is_object()) config_fail(path, "expected an object");
  SceneConfig scene;
  if (const json* v = maybe(node, "image_count")) {
    scene.image_count = get_integer(*v, path + ".image_count");
  }
  if (const json* v = maybe(node, "boxes_per_image")) {
    scene.boxes_per_image = get_count_range(*v, path + ".boxes_per_image");
  }
  if (const json* v = maybe(node, "class_weights")) {
    if (!v->is_array()) config_fail(path + ".class_weights", "expected an array");
    scene.class_weights.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      scene.class_weights.push_back(get_number(
          (*v)[i], path + ".class_weights[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = maybe(node, "box_size")) {
    scene.box_size = get_value_range(*v, path + ".box_size");
  }
  if (const json* v = maybe(node, "overlap_allowance")) {
    scene.overlap_allowance = get_number(*v, path + ".overlap_allowance");
  }
  if (const json* v = maybe(node, "seed")) {
    scene.seed = get_u64(*v, path + ".seed");
  }
  if (const json* v = maybe(node, "image_width")) {
    scene.image_width = get_integer(*v, path + ".image_width");
  }
  if (const json* v = maybe(node, "image_height")) {
    scene.image_height = get_integer(*v, path + ".image_height");
  }
  if (const json* v = maybe(node, "group_size")) {
    scene.group_size = get_integer(*v, path + ".group_size");
  }
  return scene;
}

DetectorProfile parse_detector(const json& node, const std::string& path) {
  if (!node.is_object()) config_fail(path, "expected an object");
  DetectorProfile profile;
  if (const json* v = maybe(node, "name")) {
    profile.name = get_string(*v, path + ".name");
  }
  if (const json* v = maybe(node, "miss_rate")) {
    profile.miss_rate = get_number(*v, path + ".miss_rate");
  }
  if (const json* v = maybe(node, "jitter_sigma")) {
    profile.jitter_sigma = get_number(*v, path + ".jitter_sigma");
  }
  if (const json* v = maybe(node, "false_positive_rate")) {
    profile.false_positive_rate =
        get_number(*v, path + ".false_positive_rate");
  }
  if (const json* v = maybe(node, "class_confusion_rate")) {
    profile.class_confusion_rate =
        get_number(*v, path + ".class_confusion_rate");
  }
  if (const json* v = maybe(node, "confidence")) {
    if (!v->is_object()) config_fail(path + ".confidence", "expected an object");
    if (const json* b = maybe(*v, "base")) {
      profile.confidence.base = get_number(*b, path + ".confidence.base");
    }
    if (const json* p = maybe(*v, "penalty")) {
      profile.confidence.penalty =
          get_number(*p, path + ".confidence.penalty");
    }
    if (const json* n = maybe(*v, "noise_sigma")) {
      profile.confidence.noise_sigma =
          get_number(*n, path + ".confidence.noise_sigma");
    }
  }
  if (const json* v = maybe(node, "fp_confidence")) {
    profile.fp_confidence = get_value_range(*v, path + ".fp_confidence");
  }
  if (const json* v = maybe(node, "fp_box_size")) {
    profile.fp_box_size = get_value_range(*v, path + ".fp_box_size");
  }
  if (const json* v = maybe(node, "seed_offset")) {
    profile.seed_offset = get_u64(*v, path + ".seed_offset");
  }
  return profile;
}

}  // namespace

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw InputError("config " + path.string() + ": not a JSON object");
  }

  ExperimentConfig cfg;
  if (const json* v = maybe(doc, "scene")) {
    cfg.scene = parse_scene(*v, "scene");
  }
  if (const json* v = maybe(doc, "detectors")) {
    if (!v->is_array()) config_fail("detectors", "expected an array");
    for (std::size_t d = 0; d < v->size(); ++d) {
      cfg.detectors.push_back(
          parse_detector((*v)[d], "detectors[" + std::to_string(d) + "]"));
    }
  }
  if (const json* v = maybe(doc, "fusion")) {
    if (!v->is_object()) config_fail("fusion", "expected an object");
    if (const json* t = maybe(*v, "iou_threshold")) {
      cfg.fusion.iou_threshold = get_number(*t, "fusion.iou_threshold");
    }
    if (const json* t = maybe(*v, "confidence_threshold")) {
      cfg.fusion.confidence_threshold =
          get_number(*t, "fusion.confidence_threshold");
    }
    if (const json* t = maybe(*v, "class_aware")) {
      cfg.fusion.class_aware = get_bool(*t, "fusion.class_aware");
    }
  }
  if (const json* v = maybe(doc, "eval")) {
    if (!v->is_object()) config_fail("eval", "expected an object");
    if (const json* t = maybe(*v, "iou_threshold")) {
      cfg.eval_iou = get_number(*t, "eval.iou_threshold");
    }
  }
  if (const json* v = maybe(doc, "runs")) {
    cfg.runs = get_integer(*v, "runs");
  }

  validate(cfg.scene);
  for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
    try {
      validate(cfg.detectors[d]);
    } catch (const InputError& e) {
      throw InputError("config: detectors[" + std::to_string(d) + "]: " +
                       e.what());
    }
  }
  cfg.fusion.validate();
  if (cfg.runs < 1) config_fail("runs", "must be >= 1");
  if (!(cfg.eval_iou > 0.0 && cfg.eval_iou <= 1.0)) {
    config_fail("eval.iou_threshold", "must lie in (0, 1]");
  }
  return cfg;
}

namespace {

std::string image_id_for(int index) {
  std::ostringstream out;
  out << "img_" << std::setfill('0') << std::setw(6) << index;
  return out.str();
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

}  // namespace

void materialize_dataset(const ExperimentConfig& cfg,
                         const fs::path& out_dir) {
  validate(cfg.scene);
  const auto profiles = cfg.resolved_detectors();
  for (const auto& profile : profiles) validate(profile);
  const int class_count = cfg.class_count();

  fs::create_directories(out_dir / "labels");
  const std::vector<std::string>& names =
      cfg.scene.class_weights.empty()
          ? default_class_names()
          : [&] {
              static std::vector<std::string> generated;
              generated.clear();
              for (int c = 0; c < class_count; ++c) {
                generated.push_back("class_" + std::to_string(c));
              }
              return generated;
            }();

  nlohmann::ordered_json manifest;
  manifest["classes"] = names;
  nlohmann::ordered_json images = nlohmann::ordered_json::array();

  std::vector<std::vector<GroundTruthBox>> scenes;
  scenes.reserve(static_cast<std::size_t>(cfg.scene.image_count));
  for (int i = 0; i < cfg.scene.image_count; ++i) {
    const std::string id = image_id_for(i);
    const std::string label_rel = "labels/" + id + ".txt";
    scenes.push_back(generate_scene(cfg.scene, i));
    write_label_file(out_dir / label_rel, scenes.back());
    nlohmann::ordered_json record;
    record["id"] = id;
    record["width"] = cfg.scene.image_width;
    record["height"] = cfg.scene.image_height;
    std::ostringstream group;
    group << "grp_" << std::setfill('0') << std::setw(6)
          << i / cfg.scene.group_size;
    record["group"] = group.str();
    record["labels"] = label_rel;
    images.push_back(std::move(record));
  }
  manifest["images"] = std::move(images);

  {
    const fs::path manifest_path = out_dir / "manifest.json";
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) {
      throw InputError("cannot open " + manifest_path.string() +
                       " for writing");
    }
    out << manifest.dump(2) << "\n";
    out.flush();
    if (!out) {
      throw InputError("I/O failure while writing " + manifest_path.string());
    }
  }

  for (std::size_t d = 0; d < profiles.size(); ++d) {
    const fs::path model_dir =
        out_dir / "preds" / sanitize_filename(profiles[d].name);
    fs::create_directories(model_dir);
    for (int i = 0; i < cfg.scene.image_count; ++i) {
      const auto detections =
          simulate_detector(scenes[static_cast<std::size_t>(i)], profiles[d],
                            static_cast<int>(d), i, class_count);
      write_prediction_file(model_dir / (image_id_for(i) + ".txt"),
                            detections);
    }
  }
}

}  // namespace detkit
